// Command-line entry point: one subcommand per pipeline stage.

#include <iostream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "tradrank/error.hpp"
#include "tradrank/pipeline.hpp"

using namespace tradrank;

int main(int argc, char** argv) {
  CLI::App app{"tradrank: BM25 candidate generation with a LambdaMART re-ranker"};
  app.require_subcommand(1);
  std::string config_path;
  app.add_option("-c,--config", config_path, "Pipeline configuration (JSON)")->required();

  std::string split = "train";
  auto* index = app.add_subcommand("index", "Build inverted and forward indices for every view");
  auto* tune = app.add_subcommand("tune-bm25", "Grid-search BM25 k1 and b on the tuning split");
  auto* bitext = app.add_subcommand("build-bitext", "Pair training queries with relevant document chunks");
  auto* model1 = app.add_subcommand("train-model1", "Train and prune Model 1 translation tables");
  auto* features = app.add_subcommand("extract-features", "Write feature vectors for BM25 candidates");
  features->add_option("--split", split, "Query split")->capture_default_str();
  auto* ltr = app.add_subcommand("train-ltr", "Train the LambdaMART re-ranker");
  ltr->add_option("--split", split, "Split whose feature file is used")->capture_default_str();

  RunOptions run_opts;
  std::string run_output;
  bool no_rerank = false;
  auto* run = app.add_subcommand("run", "Retrieve, re-rank and write a TREC run file");
  run->add_option("--split", run_opts.split, "Query split")->capture_default_str();
  run->add_option("-o,--output", run_output, "Run file path");
  run->add_flag("--no-rerank", no_rerank, "Write the BM25 ranking without re-ranking");

  EvaluateOptions eval_opts;
  std::string eval_run;
  std::vector<std::string> metrics;
  auto* evaluate = app.add_subcommand("evaluate", "Score a run file against the split's qrels");
  evaluate->add_option("--split", eval_opts.split, "Query split")->capture_default_str();
  evaluate->add_option("--run", eval_run, "Run file (default: the split's re-ranked run)");
  evaluate->add_option("--metric", metrics, "Metric such as mrr@10 or ndcg@20 (repeatable)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  try {
    Pipeline pipeline(load_config(config_path));
    WorkDirLock lock(pipeline.config().work_dir);
    StageSummary summary;
    if (index->parsed()) {
      summary = pipeline.index();
    } else if (tune->parsed()) {
      summary = pipeline.tune_bm25();
    } else if (bitext->parsed()) {
      summary = pipeline.build_bitext();
    } else if (model1->parsed()) {
      summary = pipeline.train_model1();
    } else if (features->parsed()) {
      summary = pipeline.extract_features(split);
    } else if (ltr->parsed()) {
      summary = pipeline.train_ltr(split);
    } else if (run->parsed()) {
      run_opts.rerank = !no_rerank;
      if (!run_output.empty()) run_opts.output = run_output;
      summary = pipeline.run(run_opts);
    } else {
      if (!eval_run.empty()) eval_opts.run = eval_run;
      if (!metrics.empty()) {
        eval_opts.metrics.clear();
        for (const auto& m : metrics) eval_opts.metrics.push_back(parse_metric(m));
      }
      summary = pipeline.evaluate(eval_opts);
    }
    std::cout << summary.to_json() << std::endl;
    return 0;
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << '\n';
    std::cout << R"({"status":"error","category":")" << to_string(e.code()) << "\"}" << std::endl;
    return exit_code_for(e.code());
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
}
