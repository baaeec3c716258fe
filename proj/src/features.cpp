#include "tradrank/features.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>
#include <unordered_map>

#include "tradrank/error.hpp"
#include "tradrank/numfmt.hpp"

namespace tradrank {

const std::array<std::string_view, kFeatureCount>& feature_names() {
  static const std::array<std::string_view, kFeatureCount> names = {
      "bm25.url.lemm",       "bm25.title.lemm",     "bm25.body.lemm",
      "cosine.title.lemm",   "cosine.body.lemm",    "overlap.title.lemm",
      "overlap.body.lemm",   "proximity.body.lemm", "proximity_ordered.body.lemm",
      "model1.url.rawtok",   "model1.title.rawtok", "model1.body.rawtok",
      "model1.body.wp",
  };
  return names;
}

const std::vector<std::string>& feature_views() {
  static const std::vector<std::string> views = {"url.lemm",   "title.lemm",   "body.lemm",
                                                 "url.rawtok", "title.rawtok", "body.rawtok",
                                                 "body.wp"};
  return views;
}

const std::vector<std::string>& model1_views() {
  static const std::vector<std::string> views = {"url.rawtok", "title.rawtok", "body.rawtok",
                                                 "body.wp"};
  return views;
}

namespace {

// Distinct ids in first-occurrence order with their counts.
struct TermCounts {
  std::vector<TermId> order;
  std::unordered_map<TermId, std::uint32_t> tf;

  explicit TermCounts(std::span<const TermId> ids) {
    for (TermId id : ids) {
      if (tf[id]++ == 0) order.push_back(id);
    }
  }
};

template <typename IdfOf>
double cosine_core(std::span<const TermId> query, std::span<const TermId> doc, IdfOf&& idf_of) {
  if (query.empty() || doc.empty()) {
    return 0.0;
  }
  const TermCounts q(query);
  const TermCounts d(doc);
  auto weight = [](std::uint32_t tf, double idf) {
    return (1.0 + std::log(static_cast<double>(tf))) * idf;
  };
  double q_norm = 0.0;
  double dot = 0.0;
  for (TermId id : q.order) {
    const double wq = weight(q.tf.at(id), idf_of(id));
    q_norm += wq * wq;
    if (auto it = d.tf.find(id); it != d.tf.end()) {
      dot += wq * weight(it->second, idf_of(id));
    }
  }
  double d_norm = 0.0;
  for (TermId id : d.order) {
    const double wd = weight(d.tf.at(id), idf_of(id));
    d_norm += wd * wd;
  }
  if (q_norm <= 0.0 || d_norm <= 0.0) {
    return 0.0;
  }
  return dot / (std::sqrt(q_norm) * std::sqrt(d_norm));
}

double overlap_core(std::span<const TermId> query, std::span<const TermId> doc) {
  const TermCounts q(query);
  if (q.order.empty()) {
    return 0.0;
  }
  std::unordered_map<TermId, bool> present;
  for (TermId id : q.order) present.emplace(id, false);
  for (TermId id : doc) {
    if (auto it = present.find(id); it != present.end()) it->second = true;
  }
  std::size_t hits = 0;
  for (TermId id : q.order) hits += present.at(id) ? 1 : 0;
  return static_cast<double>(hits) / static_cast<double>(q.order.size());
}

// Sliding-window pair counting, O(|D| * w).
template <typename IdfOf>
std::pair<double, double> proximity_core(std::span<const TermId> query, std::span<const TermId> doc,
                                         IdfOf&& idf_of, const ProximityConfig& cfg) {
  if (cfg.window < 1 || !(cfg.k1p > 0.0)) {
    throw Error(ErrorCode::InvalidArgument, "proximity needs window >= 1 and k1p > 0");
  }
  const TermCounts q(query);
  const std::size_t m = q.order.size();
  if (m < 2) {
    return {0.0, 0.0};
  }
  std::unordered_map<TermId, std::size_t> slot_of;
  std::vector<double> idf(m);
  for (std::size_t s = 0; s < m; ++s) {
    slot_of.emplace(q.order[s], s);
    idf[s] = idf_of(q.order[s]);
  }
  std::vector<char> adjacent(m * m, 0);  // ordered pairs consecutive in the query
  for (std::size_t k = 0; k + 1 < query.size(); ++k) {
    const auto a = slot_of.at(query[k]);
    const auto b = slot_of.at(query[k + 1]);
    if (a != b) adjacent[a * m + b] = 1;
  }
  std::vector<std::ptrdiff_t> doc_slot(doc.size(), -1);
  for (std::size_t i = 0; i < doc.size(); ++i) {
    if (auto it = slot_of.find(doc[i]); it != slot_of.end()) {
      doc_slot[i] = static_cast<std::ptrdiff_t>(it->second);
    }
  }
  std::vector<std::uint32_t> pf_any(m * m, 0);
  std::vector<std::uint32_t> pf_ordered(m * m, 0);
  for (std::size_t i = 0; i < doc.size(); ++i) {
    if (doc_slot[i] < 0) continue;
    const auto a = static_cast<std::size_t>(doc_slot[i]);
    const std::size_t last = std::min(doc.size() - 1, i + cfg.window);
    for (std::size_t j = i + 1; j <= last; ++j) {
      if (doc_slot[j] < 0) continue;
      const auto b = static_cast<std::size_t>(doc_slot[j]);
      if (a == b) continue;
      const std::size_t key = std::min(a, b) * m + std::max(a, b);
      ++pf_any[key];
      if (adjacent[a * m + b]) ++pf_ordered[key];
    }
  }
  double norm = 0.0;
  double sum_any = 0.0;
  double sum_ordered = 0.0;
  for (std::size_t a = 0; a < m; ++a) {
    for (std::size_t b = a + 1; b < m; ++b) {
      const double w = idf[a] + idf[b];
      norm += w;
      const double pa = pf_any[a * m + b];
      const double po = pf_ordered[a * m + b];
      sum_any += w * pa / (pa + cfg.k1p);
      sum_ordered += w * po / (po + cfg.k1p);
    }
  }
  if (norm <= 0.0) {
    return {0.0, 0.0};
  }
  return {sum_any / norm, sum_ordered / norm};
}

// Interns query then document strings into one local id space.
struct LocalIds {
  std::vector<std::string> terms;
  std::vector<TermId> query;
  std::vector<TermId> doc;

  LocalIds(const Tokens& q, const Tokens& d) {
    std::unordered_map<std::string, TermId> ids;
    auto intern = [&](const std::string& t) {
      auto [it, inserted] = ids.try_emplace(t, static_cast<TermId>(terms.size()));
      if (inserted) terms.push_back(t);
      return it->second;
    };
    for (const auto& t : q) query.push_back(intern(t));
    for (const auto& t : d) doc.push_back(intern(t));
  }
};

}  // namespace

double normalized_bm25(const Tokens& query, DocOrdinal doc, const InvertedIndex& index,
                       const BM25Params& params) {
  double idf_sum = 0.0;
  for (const auto& t : query) {
    if (auto id = index.dictionary().find(t)) {
      idf_sum += idf_from_counts(index.num_docs(), index.df(*id));
    }
  }
  if (idf_sum <= 0.0) {
    return 0.0;
  }
  return bm25_score(index, params, query, doc) / idf_sum;
}

double cosine_sim(const Tokens& query, const Tokens& doc, const IdfFunction& idf) {
  const LocalIds ids(query, doc);
  return cosine_core(ids.query, ids.doc, [&](TermId id) { return idf(ids.terms[id]); });
}

double overlap_fraction(const Tokens& query, const Tokens& doc) {
  const LocalIds ids(query, doc);
  return overlap_core(ids.query, ids.doc);
}

std::pair<double, double> proximity_scores(const Tokens& query, const Tokens& doc,
                                           const IdfFunction& idf, const ProximityConfig& cfg) {
  const LocalIds ids(query, doc);
  return proximity_core(ids.query, ids.doc, [&](TermId id) { return idf(ids.terms[id]); }, cfg);
}

// ---- FeatureExtractor -------------------------------------------------------

FeatureExtractor::FeatureExtractor(const IndexSet& indices,
                                   std::map<std::string, TranslationTable> tables,
                                   FeatureConfig config, TextResources resources)
    : indices_(indices),
      tables_(std::move(tables)),
      config_(config),
      resources_(std::move(resources)) {
  validate(config_.field_bm25);
  for (const auto& view_id : feature_views()) {
    const auto& inv = indices_.view(view_id).inverted;
    auto& idf = idf_[view_id];
    idf.resize(inv.dictionary().size());
    for (TermId t = 0; t < idf.size(); ++t) {
      idf[t] = idf_from_counts(inv.num_docs(), inv.df(t));
    }
  }
  for (const auto& view_id : model1_views()) {
    collections_.emplace(view_id, collection_model(indices_.view(view_id).inverted));
  }
}

Model1ScoreConfig FeatureExtractor::model1_config(const std::string& view_id) const {
  return {config_.model1_lambda, config_.model1_self_prob, &collections_.at(view_id)};
}

const TranslationTable& FeatureExtractor::table(const std::string& view_id) const {
  auto it = tables_.find(view_id);
  return it == tables_.end() ? empty_table_ : it->second;
}

PreparedQuery FeatureExtractor::prepare(std::string_view query_text) const {
  std::map<std::string, Tokens> views;
  for (const auto& view_id : feature_views()) {
    views[view_id] = build_query_view(query_text, indices_.view(view_id).spec, resources_).tokens;
  }
  return prepare(views);
}

PreparedQuery FeatureExtractor::prepare(const std::map<std::string, Tokens>& view_tokens) const {
  PreparedQuery prepared;
  for (const auto& view_id : feature_views()) {
    const auto& vi = indices_.view(view_id);
    const auto& dict = vi.inverted.dictionary();
    auto& view = prepared.views_[view_id];
    if (auto it = view_tokens.find(view_id); it != view_tokens.end()) {
      view.tokens = it->second;
    }
    std::unordered_map<std::string, TermId> unseen;
    const double unseen_idf = idf_from_counts(vi.inverted.num_docs(), 0);
    for (const auto& t : view.tokens) {
      if (auto id = dict.find(t)) {
        view.ids.push_back(*id);
        view.idf.push_back(idf_.at(view_id)[*id]);
      } else {
        auto [u, inserted] =
            unseen.try_emplace(t, static_cast<TermId>(dict.size() + unseen.size()));
        view.ids.push_back(u->second);
        view.idf.push_back(unseen_idf);
      }
    }
  }
  for (const auto& view_id : model1_views()) {
    auto& view = prepared.views_.at(view_id);
    if (view.tokens.empty()) {
      continue;
    }
    view.reverse = std::make_unique<ReverseTable>(view.tokens, table(view_id), model1_config(view_id));
    view.bound = view.reverse->bind(indices_.view(view_id).forward.dictionary());
  }
  return prepared;
}

FeatureVector FeatureExtractor::extract(const PreparedQuery& query, DocOrdinal doc) const {
  if (doc >= indices_.docs->size()) {
    throw Error(ErrorCode::UnknownDocument, "doc ordinal " + std::to_string(doc));
  }
  FeatureVector out{};
  auto idf_lookup = [&](const std::string& view_id) {
    const auto& table = idf_.at(view_id);
    const double unseen = idf_from_counts(indices_.docs->size(), 0);
    return [&table, unseen](TermId id) { return id < table.size() ? table[id] : unseen; };
  };

  static const std::array<std::string, 3> bm25_views = {"url.lemm", "title.lemm", "body.lemm"};
  for (std::size_t k = 0; k < bm25_views.size(); ++k) {
    const auto& view = query.views_.at(bm25_views[k]);
    const auto& vi = indices_.view(bm25_views[k]);
    const auto tokens = vi.forward.doc(doc);
    const std::size_t vocab = vi.inverted.dictionary().size();
    double idf_sum = 0.0;
    for (std::size_t i = 0; i < view.ids.size(); ++i) {
      if (view.ids[i] < vocab) idf_sum += view.idf[i];
    }
    if (idf_sum <= 0.0) {
      continue;
    }
    std::unordered_map<TermId, std::uint32_t> tf;
    for (TermId id : view.ids) tf.emplace(id, 0);
    for (TermId id : tokens) {
      if (auto it = tf.find(id); it != tf.end()) ++it->second;
    }
    double score = 0.0;
    for (std::size_t i = 0; i < view.ids.size(); ++i) {
      const auto f = tf.at(view.ids[i]);
      if (view.ids[i] < vocab && f > 0) {
        score += bm25_term_weight(view.idf[i], f, static_cast<double>(tokens.size()),
                                  vi.inverted.avg_len(), config_.field_bm25);
      }
    }
    out[k] = score / idf_sum;
  }

  static const std::array<std::string, 2> text_views = {"title.lemm", "body.lemm"};
  for (std::size_t k = 0; k < text_views.size(); ++k) {
    const auto& view = query.views_.at(text_views[k]);
    const auto tokens = indices_.view(text_views[k]).forward.doc(doc);
    out[3 + k] = cosine_core(view.ids, tokens, idf_lookup(text_views[k]));
    out[5 + k] = overlap_core(view.ids, tokens);
  }

  {
    const auto& view = query.views_.at("body.lemm");
    const auto tokens = indices_.view("body.lemm").forward.doc(doc);
    const auto [any, ordered] =
        proximity_core(view.ids, tokens, idf_lookup("body.lemm"), config_.proximity);
    out[7] = any;
    out[8] = ordered;
  }

  const auto& m1 = model1_views();
  for (std::size_t k = 0; k < m1.size(); ++k) {
    const auto& view = query.views_.at(m1[k]);
    if (!view.bound) {
      out[9 + k] = kModel1Floor;
      continue;
    }
    out[9 + k] = score_with_reverse_table(indices_.view(m1[k]).forward.doc(doc), *view.bound,
                                          model1_config(m1[k]));
  }
  return out;
}

FeatureVector FeatureExtractor::extract(const PreparedQuery& query, const std::string& doc_id) const {
  auto ord = indices_.docs->find(doc_id);
  if (!ord) {
    throw Error(ErrorCode::UnknownDocument, doc_id);
  }
  return extract(query, *ord);
}

// ---- Feature files ----------------------------------------------------------

void write_feature_file(const std::string& path, const std::vector<FeatureRow>& rows) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) {
    throw Error(ErrorCode::IoError, "cannot write " + path);
  }
  for (const auto& row : rows) {
    out << row.label << " qid:" << row.qid;
    for (std::size_t i = 0; i < kFeatureCount; ++i) {
      out << ' ' << (i + 1) << ':' << format_double(row.values[i]);
    }
    out << " # " << row.doc_id << '\n';
  }
}

std::vector<FeatureRow> read_feature_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) {
    throw Error(ErrorCode::MissingArtifact, "cannot read feature file " + path);
  }
  std::vector<FeatureRow> rows;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    const std::string where = path + ":" + std::to_string(line_no);
    FeatureRow row;
    const auto hash = line.find('#');
    if (hash != std::string::npos) {
      std::istringstream comment(line.substr(hash + 1));
      comment >> row.doc_id;
    }
    std::istringstream fields(line.substr(0, hash));
    std::string field;
    if (!(fields >> field)) {
      throw Error(ErrorCode::ParseError, where + ": empty row");
    }
    try {
      row.label = static_cast<int>(parse_int(field));
      if (!(fields >> field) || field.rfind("qid:", 0) != 0) {
        throw Error(ErrorCode::ParseError, where + ": missing qid");
      }
      row.qid = field.substr(4);
      std::vector<bool> seen(kFeatureCount, false);
      while (fields >> field) {
        const auto colon = field.find(':');
        if (colon == std::string::npos) {
          throw Error(ErrorCode::ParseError, where + ": bad feature '" + field + "'");
        }
        const auto slot = parse_int(std::string_view(field).substr(0, colon));
        if (slot < 1 || slot > static_cast<long long>(kFeatureCount)) {
          throw Error(ErrorCode::DimensionMismatch, where + ": feature slot " + std::to_string(slot));
        }
        row.values[static_cast<std::size_t>(slot - 1)] = parse_double(std::string_view(field).substr(colon + 1));
        seen[static_cast<std::size_t>(slot - 1)] = true;
      }
      if (std::find(seen.begin(), seen.end(), false) != seen.end()) {
        throw Error(ErrorCode::MissingFeatures, where + ": not all 13 features present");
      }
    } catch (const Error& e) {
      if (e.code() == ErrorCode::ParseError && std::string(e.what()).find(where) == std::string::npos) {
        throw Error(ErrorCode::ParseError, where + ": " + e.what());
      }
      throw;
    }
    rows.push_back(std::move(row));
  }
  return rows;
}

}  // namespace tradrank
