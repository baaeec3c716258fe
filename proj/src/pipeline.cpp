#include "tradrank/pipeline.hpp"

#include <fcntl.h>
#include <unistd.h>

#include <algorithm>
#include <cerrno>
#include <chrono>
#include <cmath>
#include <cstring>
#include <fstream>
#include <iostream>
#include <set>
#include <sstream>

#include "json.hpp"
#include "tradrank/error.hpp"
#include "tradrank/eval.hpp"
#include "tradrank/model1.hpp"
#include "tradrank/numfmt.hpp"

namespace fs = std::filesystem;
using json = nlohmann::json;

namespace tradrank {

// ---- Configuration ----------------------------------------------------------

namespace {

[[noreturn]] void config_error(const std::string& msg) { throw Error(ErrorCode::ConfigError, msg); }

void check_keys(const json& obj, const std::string& where, std::initializer_list<std::string_view> allowed) {
  if (!obj.is_object()) config_error(where + " must be an object");
  for (const auto& [key, value] : obj.items()) {
    if (std::find(allowed.begin(), allowed.end(), key) == allowed.end()) {
      config_error("unknown key '" + key + "' in " + where);
    }
  }
}

double get_number(const json& obj, const char* key, double fallback, const std::string& where) {
  if (!obj.contains(key)) return fallback;
  const auto& v = obj.at(key);
  if (!v.is_number()) config_error(where + "." + key + " must be a number");
  return v.get<double>();
}

std::size_t get_count(const json& obj, const char* key, std::size_t fallback, const std::string& where) {
  if (!obj.contains(key)) return fallback;
  const auto& v = obj.at(key);
  if (!v.is_number_integer() || v.get<long long>() < 0) {
    config_error(where + "." + key + " must be a non-negative integer");
  }
  return static_cast<std::size_t>(v.get<long long>());
}

bool get_bool(const json& obj, const char* key, bool fallback, const std::string& where) {
  if (!obj.contains(key)) return fallback;
  const auto& v = obj.at(key);
  if (!v.is_boolean()) config_error(where + "." + key + " must be true or false");
  return v.get<bool>();
}

std::string get_string(const json& obj, const char* key, const std::string& where) {
  const auto& v = obj.at(key);
  if (!v.is_string()) config_error(where + "." + key + " must be a string");
  return v.get<std::string>();
}

fs::path existing_file(const json& obj, const char* key, const fs::path& base, const std::string& where) {
  if (!obj.contains(key)) config_error("missing " + where + "." + key);
  fs::path p = base / get_string(obj, key, where);
  if (!fs::is_regular_file(p)) config_error(where + "." + key + ": no such file " + p.string());
  return p;
}

BM25Params parse_bm25(const json& obj, const BM25Params& fallback, const std::string& where) {
  check_keys(obj, where, {"k1", "b"});
  BM25Params p{get_number(obj, "k1", fallback.k1, where), get_number(obj, "b", fallback.b, where)};
  try {
    validate(p);
  } catch (const Error& e) {
    config_error(where + ": " + e.what());
  }
  return p;
}

std::vector<double> number_list(const json& v, const std::string& where) {
  if (!v.is_array() || v.empty()) config_error(where + " must be a non-empty array of numbers");
  std::vector<double> out;
  for (const auto& x : v) {
    if (!x.is_number()) config_error(where + " must be a non-empty array of numbers");
    out.push_back(x.get<double>());
  }
  return out;
}

FieldViewSpec parse_view(const json& obj, std::size_t i) {
  const std::string where = "views[" + std::to_string(i) + "]";
  check_keys(obj, where, {"id", "source", "scheme", "lemmatize", "stop"});
  if (!obj.contains("id") || !obj.contains("source")) config_error(where + " needs id and source");
  FieldViewSpec spec;
  spec.view_id = get_string(obj, "id", where);
  auto source = parse_view_source(get_string(obj, "source", where));
  if (!source) config_error(where + ".source must be url, title, body or all");
  spec.source = *source;
  const std::string scheme = obj.contains("scheme") ? get_string(obj, "scheme", where) : "word";
  if (scheme == "word") {
    spec.scheme = Scheme::word;
  } else if (scheme == "wordpiece") {
    spec.scheme = Scheme::wordpiece;
  } else {
    config_error(where + ".scheme must be word or wordpiece");
  }
  spec.lemmatize = get_bool(obj, "lemmatize", false, where);
  spec.stop = get_bool(obj, "stop", false, where);
  return spec;
}

void check_range(bool ok, const std::string& what) {
  if (!ok) config_error(what);
}

}  // namespace

PipelineConfig parse_config(const std::string& json_text, const fs::path& base_dir) {
  json root;
  try {
    root = json::parse(json_text);
  } catch (const json::parse_error& e) {
    config_error(std::string("malformed JSON: ") + e.what());
  }
  check_keys(root, "config",
             {"corpus", "wordpiece_vocab", "stoplist", "splits", "work_dir", "views", "retrieval_view",
              "candidates", "bm25", "tuning", "model1", "features", "lambdamart"});
  PipelineConfig cfg;
  cfg.corpus = existing_file(root, "corpus", base_dir, "config");
  if (root.contains("wordpiece_vocab")) {
    cfg.wordpiece_vocab = existing_file(root, "wordpiece_vocab", base_dir, "config");
  }
  if (root.contains("stoplist")) {
    cfg.stoplist = existing_file(root, "stoplist", base_dir, "config");
  }
  if (!root.contains("work_dir")) config_error("missing config.work_dir");
  cfg.work_dir = base_dir / get_string(root, "work_dir", "config");

  if (!root.contains("splits")) config_error("missing config.splits");
  check_keys(root.at("splits"), "splits", {"train", "dev", "test"});
  for (const auto& [name, split] : root.at("splits").items()) {
    const std::string where = "splits." + name;
    check_keys(split, where, {"queries", "qrels"});
    SplitConfig sc;
    sc.queries = existing_file(split, "queries", base_dir, where);
    if (split.contains("qrels")) sc.qrels = existing_file(split, "qrels", base_dir, where);
    cfg.splits.emplace(name, std::move(sc));
  }
  if (!cfg.splits.contains("train") || !cfg.splits.at("train").qrels) {
    config_error("splits.train with queries and qrels is required");
  }

  if (root.contains("views")) {
    const auto& views = root.at("views");
    if (!views.is_array()) config_error("views must be an array");
    cfg.views.clear();
    for (std::size_t i = 0; i < views.size(); ++i) cfg.views.push_back(parse_view(views[i], i));
  }
  try {
    validate_view_specs(cfg.views);
  } catch (const Error& e) {
    config_error(std::string("views: ") + e.what());
  }
  if (root.contains("retrieval_view")) cfg.retrieval_view = get_string(root, "retrieval_view", "config");
  std::set<std::string> view_ids;
  for (const auto& v : cfg.views) {
    view_ids.insert(v.view_id);
    if (v.scheme == Scheme::wordpiece && !cfg.wordpiece_vocab) {
      config_error("view " + v.view_id + " needs config.wordpiece_vocab");
    }
  }
  std::vector<std::string> required = feature_views();
  required.push_back(cfg.retrieval_view);
  for (const auto& id : required) {
    if (!view_ids.contains(id)) config_error("views must define " + id);
  }

  cfg.candidates = get_count(root, "candidates", cfg.candidates, "config");
  check_range(cfg.candidates >= 1, "config.candidates must be >= 1");
  if (root.contains("bm25")) cfg.bm25 = parse_bm25(root.at("bm25"), cfg.bm25, "bm25");

  if (root.contains("tuning")) {
    const auto& t = root.at("tuning");
    check_keys(t, "tuning", {"split", "metric", "k1", "b"});
    if (t.contains("split")) cfg.tuning_split = get_string(t, "split", "tuning");
    if (t.contains("metric")) {
      try {
        cfg.tuning_metric = parse_metric(get_string(t, "metric", "tuning"));
      } catch (const Error& e) {
        config_error(std::string("tuning.metric: ") + e.what());
      }
    }
    if (t.contains("k1") || t.contains("b")) {
      if (!t.contains("k1") || !t.contains("b")) config_error("tuning needs both k1 and b lists");
      cfg.bm25_grid.clear();
      for (double k1 : number_list(t.at("k1"), "tuning.k1")) {
        for (double b : number_list(t.at("b"), "tuning.b")) {
          BM25Params p{k1, b};
          try {
            validate(p);
          } catch (const Error& e) {
            config_error(std::string("tuning grid: ") + e.what());
          }
          cfg.bm25_grid.push_back(p);
        }
      }
    }
  }

  if (root.contains("model1")) {
    const auto& m = root.at("model1");
    check_keys(m, "model1",
               {"chunk_len", "iterations", "min_prob", "top_n", "renormalize", "lambda", "self_prob"});
    auto& c = cfg.model1;
    c.chunk_len = get_count(m, "chunk_len", c.chunk_len, "model1");
    c.iterations = static_cast<int>(get_count(m, "iterations", static_cast<std::size_t>(c.iterations), "model1"));
    c.min_prob = get_number(m, "min_prob", c.min_prob, "model1");
    c.top_n = get_count(m, "top_n", c.top_n, "model1");
    c.renormalize = get_bool(m, "renormalize", c.renormalize, "model1");
    c.lambda = get_number(m, "lambda", c.lambda, "model1");
    c.self_prob = get_number(m, "self_prob", c.self_prob, "model1");
  }
  check_range(cfg.model1.chunk_len >= 1, "model1.chunk_len must be >= 1");
  check_range(cfg.model1.iterations >= 1, "model1.iterations must be >= 1");
  check_range(cfg.model1.min_prob >= 0.0 && cfg.model1.min_prob <= 1.0, "model1.min_prob must be in [0,1]");
  check_range(cfg.model1.top_n >= 1, "model1.top_n must be >= 1");
  check_range(cfg.model1.lambda >= 0.0 && cfg.model1.lambda <= 1.0, "model1.lambda must be in [0,1]");
  check_range(cfg.model1.self_prob >= 0.0 && cfg.model1.self_prob <= 1.0,
              "model1.self_prob must be in [0,1]");
  cfg.features.model1_lambda = cfg.model1.lambda;
  cfg.features.model1_self_prob = cfg.model1.self_prob;

  if (root.contains("features")) {
    const auto& f = root.at("features");
    check_keys(f, "features", {"bm25", "proximity_window", "proximity_k1"});
    if (f.contains("bm25")) cfg.features.field_bm25 = parse_bm25(f.at("bm25"), cfg.features.field_bm25, "features.bm25");
    cfg.features.proximity.window = get_count(f, "proximity_window", cfg.features.proximity.window, "features");
    cfg.features.proximity.k1p = get_number(f, "proximity_k1", cfg.features.proximity.k1p, "features");
  }
  check_range(cfg.features.proximity.window >= 1, "features.proximity_window must be >= 1");
  check_range(cfg.features.proximity.k1p > 0.0, "features.proximity_k1 must be > 0");

  if (root.contains("lambdamart")) {
    const auto& l = root.at("lambdamart");
    check_keys(l, "lambdamart",
               {"num_trees", "num_leaves", "learning_rate", "min_leaf_instances", "ndcg_truncation", "sigma"});
    auto& p = cfg.lambdamart;
    p.num_trees = get_count(l, "num_trees", p.num_trees, "lambdamart");
    p.num_leaves = get_count(l, "num_leaves", p.num_leaves, "lambdamart");
    p.learning_rate = get_number(l, "learning_rate", p.learning_rate, "lambdamart");
    p.min_leaf_instances = get_count(l, "min_leaf_instances", p.min_leaf_instances, "lambdamart");
    p.ndcg_truncation = static_cast<int>(
        get_count(l, "ndcg_truncation", static_cast<std::size_t>(p.ndcg_truncation), "lambdamart"));
    p.sigma = get_number(l, "sigma", p.sigma, "lambdamart");
  }
  const auto& p = cfg.lambdamart;
  check_range(p.num_leaves >= 2, "lambdamart.num_leaves must be >= 2");
  check_range(p.learning_rate > 0.0, "lambdamart.learning_rate must be > 0");
  check_range(p.min_leaf_instances >= 1, "lambdamart.min_leaf_instances must be >= 1");
  check_range(p.ndcg_truncation >= 1, "lambdamart.ndcg_truncation must be >= 1");
  check_range(p.sigma > 0.0, "lambdamart.sigma must be > 0");
  return cfg;
}

PipelineConfig load_config(const fs::path& path) {
  std::ifstream in(path);
  if (!in) config_error("cannot read config " + path.string());
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_config(ss.str(), path.parent_path());
}

// ---- Summary and lock -------------------------------------------------------

std::string StageSummary::to_json() const {
  json j;
  j["stage"] = stage;
  j["status"] = "ok";
  j["counts"] = counts;
  if (!values.empty()) j["values"] = values;
  j["timings_ms"] = timings_ms;
  if (!outputs.empty()) j["outputs"] = outputs;
  return j.dump();
}

WorkDirLock::WorkDirLock(const fs::path& work_dir) : path_(work_dir / ".lock") {
  fs::create_directories(work_dir);
  const int fd = ::open(path_.c_str(), O_CREAT | O_EXCL | O_WRONLY, 0644);
  if (fd < 0) {
    if (errno == EEXIST) {
      throw Error(ErrorCode::LockHeld,
                  "another stage holds " + path_.string() + "; remove it if no stage is running");
    }
    throw Error(ErrorCode::IoError, "cannot create " + path_.string() + ": " + std::strerror(errno));
  }
  const std::string pid = std::to_string(::getpid()) + "\n";
  [[maybe_unused]] auto written = ::write(fd, pid.data(), pid.size());
  ::close(fd);
}

WorkDirLock::~WorkDirLock() {
  std::error_code ec;
  fs::remove(path_, ec);
}

int exit_code_for(ErrorCode code) {
  switch (code) {
    case ErrorCode::ConfigError:
    case ErrorCode::InvalidArgument:
      return 2;
    case ErrorCode::MissingArtifact:
      return 3;
    case ErrorCode::LockHeld:
      return 4;
    case ErrorCode::IoError:
    case ErrorCode::ParseError:
    case ErrorCode::InconsistentRanks:
    case ErrorCode::DuplicateDocId:
    case ErrorCode::EmptyCorpus:
    case ErrorCode::MissingVocabulary:
      return 5;
    default:
      return 6;
  }
}

// ---- Stages -----------------------------------------------------------------

namespace {

class Stopwatch {
 public:
  double lap() {
    const auto now = std::chrono::steady_clock::now();
    const double ms = std::chrono::duration<double, std::milli>(now - last_).count();
    last_ = now;
    return ms;
  }

 private:
  std::chrono::steady_clock::time_point last_ = std::chrono::steady_clock::now();
};

void require(const fs::path& path, const std::string& stage) {
  if (!fs::exists(path)) {
    throw Error(ErrorCode::MissingArtifact,
                path.string() + " not found; run the " + stage + " stage first");
  }
}

const FieldViewSpec& spec_of(const IndexSet& indices, const std::string& view_id) {
  return indices.view(view_id).spec;
}

}  // namespace

Pipeline::Pipeline(PipelineConfig config) : config_(std::move(config)), paths_{config_.work_dir} {}

const TextResources& Pipeline::resources() {
  if (!resources_) {
    TextResources r;
    if (config_.stoplist) r.stoplist = load_stoplist(config_.stoplist->string());
    if (config_.wordpiece_vocab) r.vocab = WordPieceVocab::load(config_.wordpiece_vocab->string());
    resources_ = std::move(r);
  }
  return *resources_;
}

const IndexSet& Pipeline::indices() {
  if (!indices_) {
    require(paths_.index() / "manifest.txt", "index");
    indices_ = load_indices(paths_.index().string());
  }
  return *indices_;
}

QuerySet Pipeline::split_queries(const std::string& split) const {
  auto it = config_.splits.find(split);
  if (it == config_.splits.end()) config_error("no split named '" + split + "' in the configuration");
  return read_queries(it->second.queries.string());
}

Qrels Pipeline::split_qrels(const std::string& split) const {
  auto it = config_.splits.find(split);
  if (it == config_.splits.end()) config_error("no split named '" + split + "' in the configuration");
  if (!it->second.qrels) config_error("split '" + split + "' has no qrels");
  return read_qrels(it->second.qrels->string());
}

BM25Params Pipeline::effective_bm25() const {
  const auto path = paths_.bm25_params();
  if (!fs::exists(path)) return config_.bm25;
  std::ifstream in(path);
  std::string key, value;
  BM25Params p = config_.bm25;
  bool k1 = false, b = false;
  while (in >> key >> value) {
    if (key == "k1") {
      p.k1 = parse_double(value);
      k1 = true;
    } else if (key == "b") {
      p.b = parse_double(value);
      b = true;
    }
  }
  if (!k1 || !b) throw Error(ErrorCode::ParseError, path.string() + ": expected k1 and b");
  validate(p);
  return p;
}

std::map<std::string, TranslationTable> Pipeline::load_tables() const {
  std::map<std::string, TranslationTable> tables;
  for (const auto& view : model1_views()) {
    require(paths_.table(view), "train-model1");
    tables.emplace(view, read_table(paths_.table(view).string()));
  }
  return tables;
}

StageSummary Pipeline::index() {
  StageSummary s{"index", {}, {}, {}, {}};
  Stopwatch clock;
  ReadStats stats;
  const auto corpus = read_corpus(config_.corpus.string(), &stats);
  s.timings_ms["read"] = clock.lap();
  IndexSet built = build_indices(corpus, config_.views, resources());
  s.timings_ms["build"] = clock.lap();
  fs::remove_all(paths_.index());
  save_indices(built, paths_.index().string());
  s.timings_ms["write"] = clock.lap();
  s.counts["documents"] = static_cast<double>(built.docs->size());
  s.counts["skipped_lines"] = static_cast<double>(stats.skipped);
  s.counts["views"] = static_cast<double>(built.views.size());
  for (const auto& [id, vi] : built.views) {
    s.counts["terms." + id] = static_cast<double>(vi.inverted.dictionary().size());
  }
  s.outputs["index"] = paths_.index().string();
  indices_ = std::move(built);
  return s;
}

StageSummary Pipeline::tune_bm25() {
  StageSummary s{"tune-bm25", {}, {}, {}, {}};
  Stopwatch clock;
  const std::string split = config_.splits.contains(config_.tuning_split) ? config_.tuning_split : "train";
  const auto& inv = indices().view(config_.retrieval_view).inverted;
  const auto& spec = spec_of(indices(), config_.retrieval_view);
  std::map<std::string, Tokens> queries;
  for (const auto& [qid, text] : split_queries(split)) {
    queries[qid] = build_query_view(text, spec, resources()).tokens;
  }
  const Qrels qrels = split_qrels(split);
  s.timings_ms["load"] = clock.lap();
  const auto result = tradrank::tune_bm25(inv, queries, qrels, config_.bm25_grid, config_.tuning_metric);
  s.timings_ms["search"] = clock.lap();
  std::ofstream out(paths_.bm25_params(), std::ios::trunc);
  out << "k1 " << format_double(result.best.k1) << "\nb " << format_double(result.best.b) << '\n';
  if (!out) throw Error(ErrorCode::IoError, "cannot write " + paths_.bm25_params().string());
  s.counts["grid_points"] = static_cast<double>(config_.bm25_grid.size());
  s.counts["queries"] = static_cast<double>(queries.size());
  s.values["k1"] = result.best.k1;
  s.values["b"] = result.best.b;
  s.values["metric"] = result.best_value;
  s.outputs["params"] = paths_.bm25_params().string();
  return s;
}

StageSummary Pipeline::build_bitext() {
  StageSummary s{"build-bitext", {}, {}, {}, {}};
  Stopwatch clock;
  const QuerySet queries = split_queries("train");
  const Qrels qrels = split_qrels("train");
  fs::create_directories(paths_.root / "bitext");
  for (const auto& view : model1_views()) {
    const auto& vi = indices().view(view);
    std::map<std::string, Tokens> query_tokens;
    for (const auto& [qid, text] : queries) {
      query_tokens[qid] = build_query_view(text, vi.spec, resources()).tokens;
    }
    const std::size_t chunk = vi.spec.source == ViewSource::body ? config_.model1.chunk_len : kNoLimit;
    BitextStats stats;
    const auto bitext =
        tradrank::build_bitext(query_tokens, qrels, vi.forward, *indices().docs, chunk, &stats);
    write_bitext(paths_.bitext(view).string(), bitext);
    s.counts["pairs." + view] = static_cast<double>(bitext.size());
    s.counts["missing_documents." + view] = static_cast<double>(stats.missing_documents);
    s.outputs[view] = paths_.bitext(view).string();
  }
  s.timings_ms["build"] = clock.lap();
  return s;
}

StageSummary Pipeline::train_model1() {
  StageSummary s{"train-model1", {}, {}, {}, {}};
  Stopwatch clock;
  fs::create_directories(paths_.root / "model1");
  for (const auto& view : model1_views()) {
    require(paths_.bitext(view), "build-bitext");
    const auto bitext = read_bitext(paths_.bitext(view).string());
    TranslationTable table({}, {config_.model1.iterations, 0});
    if (bitext.empty()) {
      std::cerr << "warning: empty bitext for " << view << "; writing an empty table\n";
    } else {
      auto trained = tradrank::train_model1(bitext, config_.model1.iterations);
      s.values["log_likelihood." + view] = trained.log_likelihood.back();
      table = prune_table(trained.table, config_.model1.min_prob, config_.model1.top_n,
                          config_.model1.renormalize);
    }
    write_table(paths_.table(view).string(), table);
    s.counts["entries." + view] = static_cast<double>(table.num_entries());
    s.outputs[view] = paths_.table(view).string();
    s.timings_ms[view] = clock.lap();
  }
  return s;
}

StageSummary Pipeline::extract_features(const std::string& split) {
  StageSummary s{"extract-features", {}, {}, {}, {}};
  Stopwatch clock;
  const QuerySet queries = split_queries(split);
  const Qrels qrels = split_qrels(split);
  const IndexSet& idx = indices();
  const FeatureExtractor extractor(idx, load_tables(), config_.features, resources());
  const auto& inv = idx.view(config_.retrieval_view).inverted;
  const auto& spec = spec_of(idx, config_.retrieval_view);
  const BM25Params params = effective_bm25();
  s.timings_ms["load"] = clock.lap();

  std::vector<FeatureRow> rows;
  std::size_t relevant = 0;
  for (const auto& [qid, text] : queries) {
    const auto candidates =
        retrieve_topk(inv, params, build_query_view(text, spec, resources()).tokens, config_.candidates);
    const PreparedQuery prepared = extractor.prepare(text);
    for (const auto& c : candidates.entries) {
      FeatureRow row;
      row.qid = qid;
      row.doc_id = c.doc_id;
      row.label = qrels.relevance(qid, c.doc_id);
      row.values = extractor.extract(prepared, c.doc_id);
      relevant += row.label > 0 ? 1 : 0;
      rows.push_back(std::move(row));
    }
  }
  s.timings_ms["extract"] = clock.lap();
  fs::create_directories(paths_.features(split).parent_path());
  write_feature_file(paths_.features(split).string(), rows);
  s.counts["queries"] = static_cast<double>(queries.size());
  s.counts["rows"] = static_cast<double>(rows.size());
  s.counts["relevant_rows"] = static_cast<double>(relevant);
  s.outputs["features"] = paths_.features(split).string();
  return s;
}

StageSummary Pipeline::train_ltr(const std::string& split) {
  StageSummary s{"train-ltr", {}, {}, {}, {}};
  Stopwatch clock;
  require(paths_.features(split), "extract-features");
  const auto train = TrainingSet::from_rows(read_feature_file(paths_.features(split).string()));
  s.timings_ms["load"] = clock.lap();
  TrainingTrace trace;
  const auto model = train_lambdamart(train, config_.lambdamart, &trace);
  s.timings_ms["train"] = clock.lap();
  write_model(paths_.model().string(), model);
  s.counts["groups"] = static_cast<double>(train.groups.size());
  s.counts["rows"] = static_cast<double>(train.size());
  s.counts["trees"] = static_cast<double>(model.trees().size());
  s.values["train_ndcg_initial"] = trace.ndcg.front();
  s.values["train_ndcg_final"] = trace.ndcg.back();
  s.outputs["model"] = paths_.model().string();
  return s;
}

StageSummary Pipeline::run(const RunOptions& options) {
  StageSummary s{"run", {}, {}, {}, {}};
  Stopwatch clock;
  const QuerySet queries = split_queries(options.split);
  const IndexSet& idx = indices();
  const auto& inv = idx.view(config_.retrieval_view).inverted;
  const auto& spec = spec_of(idx, config_.retrieval_view);
  const BM25Params params = effective_bm25();
  std::optional<EnsembleModel> model;
  std::optional<FeatureExtractor> extractor;
  if (options.rerank) {
    require(paths_.model(), "train-ltr");
    model = read_model(paths_.model().string());
    extractor.emplace(idx, load_tables(), config_.features, resources());
  }
  s.timings_ms["load"] = clock.lap();

  RunFile run;
  run.tag = options.rerank ? "tradrank" : "tradrank-bm25";
  std::size_t entries = 0;
  std::size_t deepest = 0;
  for (const auto& [qid, text] : queries) {
    auto candidates =
        retrieve_topk(inv, params, build_query_view(text, spec, resources()).tokens, config_.candidates);
    candidates.query_id = qid;
    if (extractor) {
      const PreparedQuery prepared = extractor->prepare(text);
      std::map<std::string, FeatureVector> features;
      for (const auto& c : candidates.entries) {
        features[c.doc_id] = extractor->extract(prepared, c.doc_id);
      }
      candidates = rerank(candidates, features, *model);
    }
    entries += candidates.entries.size();
    deepest = std::max(deepest, candidates.entries.size());
    if (!candidates.entries.empty()) run.set_ranking(qid, std::move(candidates.entries));
  }
  s.timings_ms["rank"] = clock.lap();
  const fs::path out = options.output ? *options.output : paths_.run(options.split, options.rerank);
  if (out.has_parent_path()) fs::create_directories(out.parent_path());
  write_run(out.string(), run);
  s.counts["queries"] = static_cast<double>(queries.size());
  s.counts["entries"] = static_cast<double>(entries);
  s.counts["max_per_query"] = static_cast<double>(deepest);
  s.values["k1"] = params.k1;
  s.values["b"] = params.b;
  s.outputs["run"] = out.string();
  return s;
}

StageSummary Pipeline::evaluate(const EvaluateOptions& options) {
  StageSummary s{"evaluate", {}, {}, {}, {}};
  Stopwatch clock;
  const fs::path path = options.run ? *options.run : paths_.run(options.split, true);
  require(path, "run");
  const RunFile run = read_run(path.string());
  const Qrels qrels = split_qrels(options.split);
  for (const auto& m : options.metrics) {
    const std::string name = (m.kind == MetricKind::mrr ? "mrr@" : "ndcg@") + std::to_string(m.cutoff);
    s.values[name] = m.kind == MetricKind::mrr ? mrr_at_k(run, qrels, m.cutoff) : ndcg_at_k(run, qrels, m.cutoff);
  }
  s.counts["run_queries"] = static_cast<double>(run.queries.size());
  s.counts["evaluated_queries"] = static_cast<double>(per_query_ndcg(run, qrels, 10).size());
  s.timings_ms["evaluate"] = clock.lap();
  s.outputs["run"] = path.string();
  return s;
}

}  // namespace tradrank
