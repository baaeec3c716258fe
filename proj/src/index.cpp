#include "tradrank/index.hpp"

#include <algorithm>
#include <cmath>

#include "tradrank/error.hpp"

namespace tradrank {

TermId TermDictionary::add(std::string_view term) {
  auto [it, inserted] = ids_.try_emplace(std::string(term), static_cast<TermId>(terms_.size()));
  if (inserted) {
    terms_.emplace_back(term);
  }
  return it->second;
}

std::optional<TermId> TermDictionary::find(std::string_view term) const {
  auto it = ids_.find(std::string(term));
  if (it == ids_.end()) {
    return std::nullopt;
  }
  return it->second;
}

DocOrdinal DocTable::add(const std::string& doc_id) {
  if (doc_id.empty()) {
    throw Error(ErrorCode::InvalidArgument, "empty doc_id");
  }
  auto [it, inserted] = ordinals_.try_emplace(doc_id, static_cast<DocOrdinal>(ids_.size()));
  if (!inserted) {
    throw Error(ErrorCode::DuplicateDocId, doc_id);
  }
  ids_.push_back(doc_id);
  return it->second;
}

std::optional<DocOrdinal> DocTable::find(std::string_view doc_id) const {
  auto it = ordinals_.find(std::string(doc_id));
  if (it == ordinals_.end()) {
    return std::nullopt;
  }
  return it->second;
}

void validate(const BM25Params& params) {
  if (!(params.k1 >= 0.0) || !(params.b >= 0.0 && params.b <= 1.0)) {
    throw Error(ErrorCode::InvalidArgument, "BM25 parameters out of range");
  }
}

InvertedIndex::InvertedIndex(std::string view_id, std::shared_ptr<const TermDictionary> dict,
                             std::shared_ptr<const DocTable> docs,
                             std::vector<std::vector<Posting>> postings,
                             std::vector<std::uint32_t> doc_len)
    : view_id_(std::move(view_id)),
      dict_(std::move(dict)),
      docs_(std::move(docs)),
      postings_(std::move(postings)),
      doc_len_(std::move(doc_len)) {
  for (auto len : doc_len_) {
    total_tokens_ += len;
  }
  avg_len_ = doc_len_.empty() ? 0.0
                              : static_cast<double>(total_tokens_) / static_cast<double>(doc_len_.size());
}

std::uint32_t InvertedIndex::df(std::string_view term) const {
  auto id = dict_->find(term);
  return id ? df(*id) : 0;
}

std::uint64_t InvertedIndex::cf(TermId term) const {
  std::uint64_t total = 0;
  for (const auto& p : postings_[term]) {
    total += p.tf;
  }
  return total;
}

std::uint32_t InvertedIndex::tf(TermId term, DocOrdinal doc) const {
  const auto& list = postings_[term];
  auto it = std::lower_bound(list.begin(), list.end(), doc,
                             [](const Posting& p, DocOrdinal d) { return p.doc < d; });
  return (it != list.end() && it->doc == doc) ? it->tf : 0;
}

bool InvertedIndex::operator==(const InvertedIndex& other) const {
  return view_id_ == other.view_id_ && *dict_ == *other.dict_ && *docs_ == *other.docs_ &&
         postings_ == other.postings_ && doc_len_ == other.doc_len_;
}

ForwardIndex::ForwardIndex(std::string view_id, std::shared_ptr<const TermDictionary> dict,
                           std::vector<std::uint64_t> offsets, std::vector<TermId> tokens)
    : view_id_(std::move(view_id)),
      dict_(std::move(dict)),
      offsets_(std::move(offsets)),
      tokens_(std::move(tokens)) {}

Tokens ForwardIndex::doc_tokens(DocOrdinal ord) const {
  Tokens out;
  for (TermId id : doc(ord)) {
    out.push_back(dict_->term(id));
  }
  return out;
}

bool ForwardIndex::operator==(const ForwardIndex& other) const {
  return view_id_ == other.view_id_ && *dict_ == *other.dict_ && offsets_ == other.offsets_ &&
         tokens_ == other.tokens_;
}

const ViewIndex& IndexSet::view(const std::string& view_id) const {
  auto it = views.find(view_id);
  if (it == views.end()) {
    throw Error(ErrorCode::MissingArtifact, "no index for view '" + view_id + "'");
  }
  return it->second;
}

ViewIndex build_view_index(const FieldViewSpec& spec, std::shared_ptr<const DocTable> docs,
                           const std::vector<Tokens>& token_lists) {
  auto dict = std::make_shared<TermDictionary>();
  std::vector<std::vector<Posting>> postings;
  std::vector<std::uint32_t> doc_len;
  std::vector<std::uint64_t> offsets{0};
  std::vector<TermId> flat;
  doc_len.reserve(token_lists.size());

  std::unordered_map<TermId, std::uint32_t> counts;
  std::vector<TermId> order;
  for (std::size_t d = 0; d < token_lists.size(); ++d) {
    counts.clear();
    order.clear();
    for (const auto& token : token_lists[d]) {
      const TermId id = dict->add(token);
      flat.push_back(id);
      if (counts[id]++ == 0) {
        order.push_back(id);
      }
    }
    if (postings.size() < dict->size()) {
      postings.resize(dict->size());
    }
    for (TermId id : order) {
      postings[id].push_back({static_cast<DocOrdinal>(d), counts[id]});
    }
    doc_len.push_back(static_cast<std::uint32_t>(token_lists[d].size()));
    offsets.push_back(flat.size());
  }
  std::shared_ptr<const TermDictionary> shared = std::move(dict);
  ViewIndex view;
  view.spec = spec;
  view.inverted = InvertedIndex(spec.view_id, shared, docs, std::move(postings), std::move(doc_len));
  view.forward = ForwardIndex(spec.view_id, shared, std::move(offsets), std::move(flat));
  return view;
}

IndexSet build_indices(const std::vector<DocumentRecord>& corpus,
                       const std::vector<FieldViewSpec>& specs, const TextResources& resources) {
  if (corpus.empty()) {
    throw Error(ErrorCode::EmptyCorpus, "no documents to index");
  }
  validate_view_specs(specs);
  auto docs = std::make_shared<DocTable>();
  for (const auto& doc : corpus) {
    docs->add(doc.doc_id);
  }
  IndexSet set;
  set.docs = docs;
  std::vector<Tokens> token_lists(corpus.size());
  for (const auto& spec : specs) {
    for (std::size_t d = 0; d < corpus.size(); ++d) {
      token_lists[d] = build_document_view(corpus[d], spec, resources).tokens;
    }
    set.views.emplace(spec.view_id, build_view_index(spec, set.docs, token_lists));
  }
  return set;
}

double idf_from_counts(std::size_t num_docs, std::size_t df) {
  const double n = static_cast<double>(num_docs);
  const double d = static_cast<double>(df);
  return std::log(1.0 + (n - d + 0.5) / (d + 0.5));
}

double idf(const InvertedIndex& index, std::string_view term) {
  return idf_from_counts(index.num_docs(), index.df(term));
}

double bm25_score(const InvertedIndex& index, const BM25Params& params, const Tokens& query,
                  DocOrdinal doc) {
  const double len = index.doc_len(doc);
  double score = 0.0;
  for (const auto& token : query) {
    auto id = index.dictionary().find(token);
    if (!id) {
      continue;
    }
    const std::uint32_t tf = index.tf(*id, doc);
    if (tf == 0) {
      continue;
    }
    score += bm25_term_weight(idf_from_counts(index.num_docs(), index.df(*id)), tf, len,
                              index.avg_len(), params);
  }
  return score;
}

}  // namespace tradrank
