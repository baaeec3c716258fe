#include "synthetic.hpp"

#include <algorithm>
#include <fstream>
#include <map>
#include <set>
#include <sstream>

namespace fs = std::filesystem;

namespace synth {

TempDir::TempDir(const std::string& prefix) {
  static std::random_device rd;
  for (;;) {
    path_ = fs::temp_directory_path() / (prefix + "-" + std::to_string(rd()));
    if (fs::create_directory(path_)) break;
  }
}

TempDir::~TempDir() {
  std::error_code ec;
  fs::remove_all(path_, ec);
}

fs::path fixture_dir() { return fs::path(TRADRANK_FIXTURE_DIR); }

fs::path copy_fixture(const fs::path& dest) {
  fs::create_directories(dest);
  for (const auto& entry : fs::directory_iterator(fixture_dir())) {
    if (entry.is_regular_file()) {
      fs::copy_file(entry.path(), dest / entry.path().filename(), fs::copy_options::overwrite_existing);
    }
  }
  return dest / "config.json";
}

int uniform_int(Rng& rng, int lo, int hi) { return std::uniform_int_distribution<int>(lo, hi)(rng); }

std::string term(int id) { return "t" + std::to_string(id); }

namespace {

// Squares a uniform draw to skew frequencies toward low term ids.
int skewed_term(Rng& rng, int vocab) {
  const double u = std::uniform_real_distribution<double>(0.0, 1.0)(rng);
  return std::min(vocab - 1, static_cast<int>(u * u * vocab));
}

}  // namespace

std::vector<Tokens> random_corpus(Rng& rng, std::size_t docs, int vocab, int max_len) {
  std::vector<Tokens> out(docs);
  for (auto& d : out) {
    const int len = uniform_int(rng, 0, max_len);
    for (int i = 0; i < len; ++i) d.push_back(term(skewed_term(rng, vocab)));
  }
  return out;
}

Tokens random_query(Rng& rng, int vocab, int max_len) {
  Tokens q;
  const int len = uniform_int(rng, 1, max_len);
  for (int i = 0; i < len; ++i) q.push_back(term(skewed_term(rng, vocab)));
  return q;
}

tradrank::TranslationTable random_table(Rng& rng, int sources, int targets, int max_row) {
  std::vector<tradrank::TranslationEntry> entries;
  std::uniform_real_distribution<double> weight(0.05, 1.0);
  for (int s = 0; s < sources; ++s) {
    std::set<int> picked;
    const int n = uniform_int(rng, 1, std::min(max_row, targets));
    while (static_cast<int>(picked.size()) < n) picked.insert(uniform_int(rng, 0, targets - 1));
    std::vector<double> w;
    for (std::size_t i = 0; i < picked.size(); ++i) w.push_back(weight(rng));
    double total = 0.0;
    for (double x : w) total += x;
    std::size_t i = 0;
    for (int t : picked) entries.push_back({term(s), term(t), w[i++] / total});
  }
  return tradrank::TranslationTable(std::move(entries), {5, 0});
}

std::vector<tradrank::BitextPair> random_bitext(Rng& rng, std::size_t pairs, int vocab) {
  std::vector<tradrank::BitextPair> out(pairs);
  for (auto& p : out) {
    p.target = random_query(rng, vocab, 4);
    p.source = random_query(rng, vocab, 8);
  }
  return out;
}

tradrank::TrainingSet label_feature_groups(Rng& rng, int queries, int docs_per_query, int max_label) {
  tradrank::TrainingSet set;
  std::uniform_real_distribution<double> noise(0.0, 1.0);
  for (int q = 0; q < queries; ++q) {
    auto& group = set.groups["q" + std::to_string(q)];
    for (int d = 0; d < docs_per_query; ++d) {
      tradrank::LabeledDoc doc;
      doc.doc_id = "d" + std::to_string(d);
      doc.label = uniform_int(rng, 0, max_label);
      doc.features[0] = doc.label;
      for (std::size_t f = 1; f < tradrank::kFeatureCount; ++f) doc.features[f] = noise(rng);
      group.push_back(doc);
    }
  }
  return set;
}

fs::path write_synonym_corpus(const fs::path& dir, std::uint64_t seed) {
  constexpr int kPairs = 40;
  constexpr int kFiller = 200;
  constexpr int kTrainQueries = 100;  // Model 1 bitext
  constexpr int kDevQueries = 60;     // LambdaMART training
  constexpr int kTestQueries = 40;
  constexpr int kDistractors = 3;
  Rng rng(seed);
  auto num = [](int i) {
    std::ostringstream s;
    s.width(3);
    s.fill('0');
    s << i;
    return s.str();
  };
  auto query_term = [&](int i) { return "ka" + num(i); };
  auto doc_term = [&](int i) { return "zb" + num(i); };
  auto filler = [&](int i) { return "f" + num(i); };

  std::vector<std::pair<int, int>> all_pairs;
  for (int i = 0; i < kPairs; ++i) {
    for (int j = i + 1; j < kPairs; ++j) all_pairs.emplace_back(i, j);
  }
  std::shuffle(all_pairs.begin(), all_pairs.end(), rng);

  struct Doc {
    Tokens body;
    std::string qid;  // set for relevant documents
  };
  std::vector<Doc> docs;
  auto add_filler = [&](Tokens& body, std::size_t len) {
    while (body.size() < len) body.push_back(filler(uniform_int(rng, 0, kFiller - 1)));
    std::shuffle(body.begin(), body.end(), rng);
  };
  auto other_than = [&](int a, int b) {
    int k;
    do {
      k = uniform_int(rng, 0, kPairs - 1);
    } while (k == a || k == b);
    return k;
  };

  std::map<std::string, std::vector<std::pair<std::string, std::string>>> split_queries;
  for (int n = 0; n < kTrainQueries + kDevQueries + kTestQueries; ++n) {
    const auto [i, j] = all_pairs[static_cast<std::size_t>(n)];
    const std::string split = n < kTrainQueries ? "train" : n < kTrainQueries + kDevQueries ? "dev" : "test";
    const std::string qid = split + num(n);
    split_queries[split].emplace_back(qid, query_term(i) + " " + query_term(j));

    Tokens relevant{uniform_int(rng, 0, 1) == 0 ? query_term(i) : query_term(j), doc_term(i), doc_term(j)};
    add_filler(relevant, 8);
    docs.push_back({relevant, qid});
    for (int d = 0; d < kDistractors; ++d) {
      Tokens body{query_term(i), query_term(j), doc_term(other_than(i, j)), doc_term(other_than(i, j))};
      add_filler(body, 8);
      docs.push_back({body, ""});
    }
  }
  std::shuffle(docs.begin(), docs.end(), rng);

  fs::create_directories(dir);
  std::ofstream corpus(dir / "docs.tsv");
  std::map<std::string, std::ofstream> qrels;
  for (const auto& [split, queries] : split_queries) qrels[split].open(dir / (split + "_qrels.txt"));
  for (std::size_t d = 0; d < docs.size(); ++d) {
    const std::string id = "d" + num(static_cast<int>(d));
    std::string body;
    for (const auto& t : docs[d].body) body += (body.empty() ? "" : " ") + t;
    corpus << id << "\thttp://example.org/page\t\t" << body << '\n';
    if (!docs[d].qid.empty()) {
      const std::string split = docs[d].qid.substr(0, docs[d].qid.size() - 3);
      qrels[split] << docs[d].qid << " 0 " << id << " 1\n";
    }
  }
  for (const auto& [split, queries] : split_queries) {
    std::ofstream out(dir / (split + "_queries.tsv"));
    for (const auto& [qid, text] : queries) out << qid << '\t' << text << '\n';
  }
  qrels.clear();
  std::ofstream vocab(dir / "vocab.txt");
  vocab << "[UNK]\n";
  for (char c : std::string("abcdefghijklmnopqrstuvwxyz0123456789")) vocab << c << "\n##" << c << '\n';

  std::ofstream config(dir / "config.json");
  config << R"({
  "corpus": "docs.tsv",
  "wordpiece_vocab": "vocab.txt",
  "splits": {
    "train": {"queries": "train_queries.tsv", "qrels": "train_qrels.txt"},
    "dev": {"queries": "dev_queries.tsv", "qrels": "dev_qrels.txt"},
    "test": {"queries": "test_queries.tsv", "qrels": "test_qrels.txt"}
  },
  "work_dir": "work",
  "candidates": 100,
  "model1": {"iterations": 10},
  "lambdamart": {"num_trees": 100, "num_leaves": 8, "min_leaf_instances": 5}
}
)";
  return dir / "config.json";
}

}  // namespace synth
