#include "tradrank/model1.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "tradrank/error.hpp"

namespace tradrank {

namespace {

std::uint64_t pair_key(std::uint32_t source, std::uint32_t target) {
  return (static_cast<std::uint64_t>(source) << 32) | target;
}

// t'(q|w): translation probability with self-translation mixed in.
inline double mixed_prob(double t, bool same_term, double self_prob) {
  return (1.0 - self_prob) * t + self_prob * (same_term ? 1.0 : 0.0);
}

double background_prob(const std::string& term, const Model1ScoreConfig& cfg) {
  if (cfg.collection == nullptr) {
    return 0.0;
  }
  auto it = cfg.collection->find(term);
  return it == cfg.collection->end() ? 0.0 : it->second;
}

void check_config(const Model1ScoreConfig& cfg) {
  if (!(cfg.lambda >= 0.0 && cfg.lambda < 1.0) || !(cfg.self_prob >= 0.0 && cfg.self_prob < 1.0)) {
    throw Error(ErrorCode::InvalidArgument, "Model 1 lambda and self_prob must be in [0,1)");
  }
}

// Shared tail of both scoring paths: acc[i] holds sum over document
// positions of t'(q_i|w) accumulated in position order.
double finish_score(const std::vector<double>& acc, std::size_t doc_len,
                    const std::vector<double>& background, double lambda) {
  double total = 0.0;
  for (std::size_t i = 0; i < acc.size(); ++i) {
    const double translation = doc_len == 0 ? 0.0 : acc[i] / static_cast<double>(doc_len);
    const double p = (1.0 - lambda) * translation + background[i];
    total += p > 0.0 ? std::log(p) : kModel1Floor;
  }
  return total / static_cast<double>(acc.size());
}

std::vector<double> background_terms(const Tokens& query, const Model1ScoreConfig& cfg) {
  std::vector<double> out;
  out.reserve(query.size());
  for (const auto& q : query) {
    out.push_back(cfg.lambda * background_prob(q, cfg));
  }
  return out;
}

}  // namespace

// ---- TranslationTable -----------------------------------------------------

TranslationTable::TranslationTable(std::vector<TranslationEntry> entries, TranslationMeta meta)
    : meta_(meta) {
  for (const auto& e : entries) {
    if (!(e.prob > 0.0 && e.prob <= 1.0)) {
      throw Error(ErrorCode::InvalidArgument,
                  "translation probability out of (0,1] for " + e.source + " -> " + e.target);
    }
    sources_.push_back(e.source);
    targets_.push_back(e.target);
  }
  auto sort_unique = [](std::vector<std::string>& v) {
    std::sort(v.begin(), v.end());
    v.erase(std::unique(v.begin(), v.end()), v.end());
  };
  sort_unique(sources_);
  sort_unique(targets_);
  for (std::uint32_t i = 0; i < sources_.size(); ++i) source_ids_.emplace(sources_[i], i);
  for (std::uint32_t i = 0; i < targets_.size(); ++i) target_ids_.emplace(targets_[i], i);

  rows_.resize(sources_.size());
  columns_.resize(targets_.size());
  for (const auto& e : entries) {
    const auto s = source_ids_.at(e.source);
    const auto t = target_ids_.at(e.target);
    if (!lookup_.emplace(pair_key(s, t), e.prob).second) {
      throw Error(ErrorCode::InvalidArgument, "duplicate translation entry " + e.source + " -> " + e.target);
    }
    rows_[s].push_back({t, e.prob});
  }
  for (auto& row : rows_) {
    // Target ids follow lexicographic order, so this tie-break is by term.
    std::sort(row.begin(), row.end(), [](const Cell& a, const Cell& b) {
      return a.prob != b.prob ? a.prob > b.prob : a.target < b.target;
    });
  }
  for (std::uint32_t s = 0; s < rows_.size(); ++s) {
    for (const auto& cell : rows_[s]) {
      columns_[cell.target].emplace_back(s, cell.prob);
    }
  }
}

std::size_t TranslationTable::num_entries() const { return lookup_.size(); }

std::optional<std::uint32_t> TranslationTable::find_source(std::string_view term) const {
  auto it = source_ids_.find(std::string(term));
  if (it == source_ids_.end()) return std::nullopt;
  return it->second;
}

std::optional<std::uint32_t> TranslationTable::find_target(std::string_view term) const {
  auto it = target_ids_.find(std::string(term));
  if (it == target_ids_.end()) return std::nullopt;
  return it->second;
}

double TranslationTable::row_mass(std::uint32_t source) const {
  double mass = 0.0;
  for (const auto& cell : rows_[source]) {
    mass += cell.prob;
  }
  return mass;
}

double TranslationTable::prob(std::string_view source, std::string_view target) const {
  auto s = find_source(source);
  auto t = find_target(target);
  if (!s || !t) {
    return 0.0;
  }
  auto it = lookup_.find(pair_key(*s, *t));
  return it == lookup_.end() ? 0.0 : it->second;
}

std::vector<TranslationEntry> TranslationTable::entries() const {
  std::vector<TranslationEntry> out;
  out.reserve(num_entries());
  for (std::uint32_t s = 0; s < rows_.size(); ++s) {
    for (const auto& cell : rows_[s]) {
      out.push_back({sources_[s], targets_[cell.target], cell.prob});
    }
  }
  return out;
}

// ---- Bitext -----------------------------------------------------------------

std::vector<Tokens> chunk_document(const Tokens& tokens, std::size_t target_len) {
  if (target_len < 1) {
    throw Error(ErrorCode::InvalidArgument, "chunk length must be >= 1");
  }
  std::vector<Tokens> chunks;
  for (std::size_t start = 0; start < tokens.size(); start += target_len) {
    const std::size_t end = std::min(tokens.size(), start + target_len);
    chunks.emplace_back(tokens.begin() + static_cast<std::ptrdiff_t>(start),
                        tokens.begin() + static_cast<std::ptrdiff_t>(end));
  }
  return chunks;
}

std::vector<BitextPair> build_bitext(const std::map<std::string, Tokens>& queries,
                                     const Qrels& qrels, const ForwardIndex& forward,
                                     const DocTable& docs, std::size_t target_len,
                                     BitextStats* stats) {
  BitextStats local;
  std::vector<BitextPair> bitext;
  for (const auto& [qid, judged] : qrels.judgments) {
    auto q = queries.find(qid);
    for (const auto& [doc_id, rel] : judged) {
      if (rel < 1) {
        continue;
      }
      if (q == queries.end() || q->second.empty()) {
        ++local.dropped_empty;
        continue;
      }
      auto ord = docs.find(doc_id);
      if (!ord) {
        ++local.missing_documents;
        continue;
      }
      const auto chunks = chunk_document(forward.doc_tokens(*ord), target_len);
      if (chunks.empty()) {
        ++local.dropped_empty;
      }
      for (const auto& chunk : chunks) {
        bitext.push_back({q->second, chunk});
      }
    }
  }
  if (stats) {
    *stats = local;
  }
  return bitext;
}

// ---- EM training ------------------------------------------------------------

namespace {

// Sparse co-occurrence model used during training. Entry indices for every
// (target position, source position) of every pair are resolved once.
struct TrainingState {
  std::vector<std::string> sources;
  std::vector<std::string> targets;
  std::vector<std::uint32_t> entry_source;  // entry -> source id
  std::vector<std::uint32_t> entry_target;  // entry -> target id
  std::vector<double> prob;
  // Per pair: |target| x |source| entry indices, target-major.
  std::vector<std::vector<std::uint32_t>> cells;
};

TrainingState prepare(const std::vector<BitextPair>& bitext) {
  TrainingState st;
  std::unordered_map<std::string, std::uint32_t> source_ids;
  std::unordered_map<std::string, std::uint32_t> target_ids;
  std::unordered_map<std::uint64_t, std::uint32_t> entry_of;
  auto intern = [](std::unordered_map<std::string, std::uint32_t>& ids,
                   std::vector<std::string>& names, const std::string& term) {
    auto [it, inserted] = ids.try_emplace(term, static_cast<std::uint32_t>(names.size()));
    if (inserted) names.push_back(term);
    return it->second;
  };
  st.cells.reserve(bitext.size());
  for (const auto& pair : bitext) {
    std::vector<std::uint32_t> src(pair.source.size());
    for (std::size_t i = 0; i < src.size(); ++i) {
      src[i] = intern(source_ids, st.sources, pair.source[i]);
    }
    std::vector<std::uint32_t> cells;
    cells.reserve(pair.target.size() * src.size());
    for (const auto& f : pair.target) {
      const auto t = intern(target_ids, st.targets, f);
      for (auto s : src) {
        auto [it, inserted] =
            entry_of.try_emplace(pair_key(s, t), static_cast<std::uint32_t>(st.entry_source.size()));
        if (inserted) {
          st.entry_source.push_back(s);
          st.entry_target.push_back(t);
        }
        cells.push_back(it->second);
      }
    }
    st.cells.push_back(std::move(cells));
  }
  st.prob.assign(st.entry_source.size(), 1.0 / static_cast<double>(st.targets.size()));
  return st;
}

// One E-step. Returns the corpus log-likelihood under the current
// probabilities; fills expected counts when counts != nullptr.
double expectation(const std::vector<BitextPair>& bitext, const TrainingState& st,
                   std::vector<double>* counts) {
  double ll = 0.0;
  for (std::size_t p = 0; p < bitext.size(); ++p) {
    const std::size_t m = bitext[p].target.size();
    const std::size_t l = bitext[p].source.size();
    const auto& cells = st.cells[p];
    for (std::size_t j = 0; j < m; ++j) {
      double denom = 0.0;
      for (std::size_t i = 0; i < l; ++i) {
        denom += st.prob[cells[j * l + i]];
      }
      ll += std::log(denom / static_cast<double>(l));
      if (counts != nullptr) {
        for (std::size_t i = 0; i < l; ++i) {
          const auto e = cells[j * l + i];
          (*counts)[e] += st.prob[e] / denom;
        }
      }
    }
  }
  return ll;
}

void maximization(TrainingState& st, const std::vector<double>& counts) {
  std::vector<double> totals(st.sources.size(), 0.0);
  for (std::size_t e = 0; e < counts.size(); ++e) {
    totals[st.entry_source[e]] += counts[e];
  }
  for (std::size_t e = 0; e < counts.size(); ++e) {
    const double total = totals[st.entry_source[e]];
    st.prob[e] = total > 0.0 ? counts[e] / total : 0.0;
  }
}

void validate_bitext(const std::vector<BitextPair>& bitext) {
  if (bitext.empty()) {
    throw Error(ErrorCode::EmptyBitext, "no training pairs");
  }
  for (const auto& pair : bitext) {
    if (pair.source.empty() || pair.target.empty()) {
      throw Error(ErrorCode::InvalidArgument, "bitext pairs must have nonempty sides");
    }
  }
}

}  // namespace

Model1TrainingResult train_model1(const std::vector<BitextPair>& bitext, int iterations) {
  if (iterations < 1) {
    throw Error(ErrorCode::InvalidArgument, "EM needs at least one iteration");
  }
  validate_bitext(bitext);
  TrainingState st = prepare(bitext);
  Model1TrainingResult result;
  std::vector<double> counts(st.prob.size());
  for (int it = 0; it < iterations; ++it) {
    std::fill(counts.begin(), counts.end(), 0.0);
    result.log_likelihood.push_back(expectation(bitext, st, &counts));
    maximization(st, counts);
  }
  result.log_likelihood.push_back(expectation(bitext, st, nullptr));

  std::vector<TranslationEntry> entries;
  entries.reserve(st.prob.size());
  for (std::size_t e = 0; e < st.prob.size(); ++e) {
    if (st.prob[e] > 0.0) {
      entries.push_back({st.sources[st.entry_source[e]], st.targets[st.entry_target[e]],
                         std::min(st.prob[e], 1.0)});
    }
  }
  result.table = TranslationTable(std::move(entries), {iterations, bitext.size()});
  return result;
}

double corpus_log_likelihood(const std::vector<BitextPair>& bitext, const TranslationTable& table) {
  double ll = 0.0;
  for (const auto& pair : bitext) {
    for (const auto& f : pair.target) {
      double sum = 0.0;
      for (const auto& e : pair.source) {
        sum += table.prob(e, f);
      }
      ll += std::log(sum / static_cast<double>(pair.source.size()));
    }
  }
  return ll;
}

TranslationTable prune_table(const TranslationTable& table, double min_prob, std::size_t top_n,
                             bool renormalize) {
  if (!(min_prob >= 0.0 && min_prob < 1.0) || top_n < 1) {
    throw Error(ErrorCode::InvalidArgument, "prune needs min_prob in [0,1) and top_n >= 1");
  }
  std::vector<TranslationEntry> kept;
  for (std::uint32_t s = 0; s < table.source_size(); ++s) {
    std::vector<TranslationEntry> row;
    for (const auto& cell : table.row(s)) {
      if (row.size() == top_n) {
        break;
      }
      if (cell.prob >= min_prob) {
        row.push_back({table.source_term(s), table.target_term(cell.target), cell.prob});
      }
    }
    if (renormalize && !row.empty()) {
      double mass = 0.0;
      for (const auto& e : row) mass += e.prob;
      for (auto& e : row) e.prob = std::min(1.0, e.prob / mass);
    }
    kept.insert(kept.end(), row.begin(), row.end());
  }
  return TranslationTable(std::move(kept), table.meta());
}

// ---- Scoring ------------------------------------------------------------

CollectionModel collection_model(const InvertedIndex& index) {
  CollectionModel model;
  const double total = static_cast<double>(index.total_tokens());
  if (total == 0.0) {
    return model;
  }
  const auto& dict = index.dictionary();
  for (TermId t = 0; t < dict.size(); ++t) {
    model.emplace(dict.term(t), static_cast<double>(index.cf(t)) / total);
  }
  return model;
}

double model1_log_score(const Tokens& query, const Tokens& doc, const TranslationTable& table,
                        const Model1ScoreConfig& cfg) {
  if (query.empty()) {
    throw Error(ErrorCode::EmptyQuery, "Model 1 score of an empty query");
  }
  check_config(cfg);
  std::vector<double> acc(query.size(), 0.0);
  for (std::size_t i = 0; i < query.size(); ++i) {
    for (const auto& w : doc) {
      acc[i] += mixed_prob(table.prob(w, query[i]), w == query[i], cfg.self_prob);
    }
  }
  return finish_score(acc, doc.size(), background_terms(query, cfg), cfg.lambda);
}

ReverseTable::ReverseTable(const Tokens& query, const TranslationTable& table,
                           const Model1ScoreConfig& cfg)
    : query_(query) {
  if (query.empty()) {
    throw Error(ErrorCode::EmptyQuery, "reverse table for an empty query");
  }
  check_config(cfg);
  const std::size_t m = query.size();
  // Candidate sources: every row with an entry for some query term, plus
  // the query terms themselves (self-translation).
  std::vector<std::string> candidates;
  std::unordered_map<std::string, bool> seen;
  for (const auto& q : query) {
    if (seen.emplace(q, true).second) candidates.push_back(q);
    if (auto t = table.find_target(q)) {
      for (const auto& [s, prob] : table.column(*t)) {
        (void)prob;
        if (seen.emplace(table.source_term(s), true).second) {
          candidates.push_back(table.source_term(s));
        }
      }
    }
  }
  values_.reserve(candidates.size() * m);
  for (const auto& w : candidates) {
    const std::size_t slot = slot_of_.size();
    slot_of_.emplace(w, slot);
    for (std::size_t i = 0; i < m; ++i) {
      values_.push_back(mixed_prob(table.prob(w, query[i]), w == query[i], cfg.self_prob));
    }
  }
  background_ = background_terms(query, cfg);
}

const double* ReverseTable::contributions(std::string_view doc_term) const {
  auto it = slot_of_.find(std::string(doc_term));
  if (it == slot_of_.end()) {
    return nullptr;
  }
  return values_.data() + it->second * query_.size();
}

ReverseTable::Bound ReverseTable::bind(const TermDictionary& dict) const {
  Bound bound;
  bound.owner_ = this;
  for (const auto& [term, slot] : slot_of_) {
    if (auto id = dict.find(term)) {
      bound.slots_.emplace(*id, values_.data() + slot * query_.size());
    }
  }
  return bound;
}

double score_with_reverse_table(const Tokens& doc, const ReverseTable& rt,
                                const Model1ScoreConfig& cfg) {
  const std::size_t m = rt.query_length();
  std::vector<double> acc(m, 0.0);
  for (const auto& w : doc) {
    if (const double* c = rt.contributions(w)) {
      for (std::size_t i = 0; i < m; ++i) acc[i] += c[i];
    }
  }
  return finish_score(acc, doc.size(), rt.background(), cfg.lambda);
}

double score_with_reverse_table(std::span<const TermId> doc, const ReverseTable::Bound& rt,
                                const Model1ScoreConfig& cfg) {
  const std::size_t m = rt.table().query_length();
  std::vector<double> acc(m, 0.0);
  for (TermId w : doc) {
    if (const double* c = rt.contributions(w)) {
      for (std::size_t i = 0; i < m; ++i) acc[i] += c[i];
    }
  }
  return finish_score(acc, doc.size(), rt.table().background(), cfg.lambda);
}

}  // namespace tradrank
