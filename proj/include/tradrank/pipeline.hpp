#pragma once

// Stage orchestration over one configuration file and one work directory.

#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "tradrank/error.hpp"
#include "tradrank/features.hpp"
#include "tradrank/index.hpp"
#include "tradrank/ltr.hpp"

namespace tradrank {

struct SplitConfig {
  std::filesystem::path queries;
  std::optional<std::filesystem::path> qrels;
};

struct Model1Config {
  std::size_t chunk_len = 16;  // body views only
  int iterations = 5;
  double min_prob = 1e-3;
  std::size_t top_n = 100;
  bool renormalize = false;
  double lambda = 0.1;
  double self_prob = 0.05;
};

/// Relative paths in the file are resolved against the file's directory.
struct PipelineConfig {
  std::filesystem::path corpus;
  std::optional<std::filesystem::path> wordpiece_vocab;
  std::optional<std::filesystem::path> stoplist;
  std::map<std::string, SplitConfig> splits;  // "train" is required
  std::filesystem::path work_dir;
  std::vector<FieldViewSpec> views = default_view_specs();
  std::string retrieval_view = "all.lemm";
  std::size_t candidates = 1000;
  BM25Params bm25;
  std::vector<BM25Params> bm25_grid = default_bm25_grid();
  MetricSpec tuning_metric;
  std::string tuning_split = "dev";  // falls back to train when absent
  Model1Config model1;
  FeatureConfig features;
  LambdaMartParams lambdamart;
};

/// Parses and fully validates a JSON configuration. Throws ConfigError.
PipelineConfig load_config(const std::filesystem::path& path);
PipelineConfig parse_config(const std::string& json_text, const std::filesystem::path& base_dir);

/// Counts and timings reported by a stage, printed as JSON by the CLI.
struct StageSummary {
  std::string stage;
  std::map<std::string, double> counts;
  std::map<std::string, double> values;
  std::map<std::string, double> timings_ms;
  std::map<std::string, std::string> outputs;

  std::string to_json() const;
};

/// Artifact locations inside the work directory.
struct ArtifactPaths {
  std::filesystem::path root;

  std::filesystem::path index() const { return root / "index"; }
  std::filesystem::path bm25_params() const { return root / "bm25_params.txt"; }
  std::filesystem::path bitext(const std::string& view) const { return root / "bitext" / (view + ".txt"); }
  std::filesystem::path table(const std::string& view) const { return root / "model1" / (view + ".table"); }
  std::filesystem::path features(const std::string& split) const { return root / "features" / (split + ".svm"); }
  std::filesystem::path model() const { return root / "lambdamart.model"; }
  std::filesystem::path run(const std::string& split, bool reranked) const {
    return root / "runs" / (split + (reranked ? ".run" : ".bm25.run"));
  }
};

struct RunOptions {
  std::string split = "test";
  bool rerank = true;
  std::optional<std::filesystem::path> output;
};

struct EvaluateOptions {
  std::string split = "test";
  std::optional<std::filesystem::path> run;  // defaults to the reranked run of the split
  std::vector<MetricSpec> metrics{{MetricKind::mrr, 100}, {MetricKind::ndcg, 10}};
};

/// Holds the work-directory lock for its lifetime. Throws LockHeld.
class WorkDirLock {
 public:
  explicit WorkDirLock(const std::filesystem::path& work_dir);
  ~WorkDirLock();
  WorkDirLock(const WorkDirLock&) = delete;
  WorkDirLock& operator=(const WorkDirLock&) = delete;

 private:
  std::filesystem::path path_;
};

class Pipeline {
 public:
  explicit Pipeline(PipelineConfig config);

  const PipelineConfig& config() const { return config_; }
  const ArtifactPaths& paths() const { return paths_; }

  StageSummary index();
  StageSummary tune_bm25();
  StageSummary build_bitext();
  StageSummary train_model1();
  StageSummary extract_features(const std::string& split = "train");
  StageSummary train_ltr(const std::string& split = "train");
  StageSummary run(const RunOptions& options);
  StageSummary evaluate(const EvaluateOptions& options);

  /// BM25 parameters in effect: the tuned ones when tune-bm25 has run.
  BM25Params effective_bm25() const;

 private:
  const TextResources& resources();
  const IndexSet& indices();
  QuerySet split_queries(const std::string& split) const;
  Qrels split_qrels(const std::string& split) const;
  std::map<std::string, TranslationTable> load_tables() const;

  PipelineConfig config_;
  ArtifactPaths paths_;
  std::optional<TextResources> resources_;
  std::optional<IndexSet> indices_;
};

/// Exit status for a failure category.
int exit_code_for(ErrorCode code);

}  // namespace tradrank
