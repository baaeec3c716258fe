#include <algorithm>
#include <fstream>
#include <sstream>
#include <unordered_set>

#include "tradrank/error.hpp"
#include "tradrank/eval.hpp"
#include "tradrank/numfmt.hpp"

namespace tradrank {

namespace {

std::vector<std::string> split_ws(const std::string& line) {
  std::istringstream in(line);
  std::vector<std::string> fields;
  std::string field;
  while (in >> field) {
    fields.push_back(field);
  }
  return fields;
}

std::string where(const std::string& path, std::size_t line_no) {
  return path + ":" + std::to_string(line_no);
}

}  // namespace

Qrels read_qrels(const std::string& path) {
  std::ifstream in(path);
  if (!in) {
    throw Error(ErrorCode::IoError, "cannot open qrels " + path);
  }
  Qrels qrels;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const auto fields = split_ws(line);
    if (fields.empty()) {
      continue;
    }
    if (fields.size() != 4) {
      throw Error(ErrorCode::ParseError, where(path, line_no) + ": expected 'qid 0 docid rel'");
    }
    long long rel = 0;
    try {
      rel = parse_int(fields[3]);
    } catch (const Error&) {
      throw Error(ErrorCode::ParseError, where(path, line_no) + ": bad relevance '" + fields[3] + "'");
    }
    // Negative TREC labels (e.g. -2 for junk) count as non-relevant.
    qrels.set(fields[0], fields[2], static_cast<int>(std::max(0LL, rel)));
  }
  return qrels;
}

void write_qrels(const std::string& path, const Qrels& qrels) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) {
    throw Error(ErrorCode::IoError, "cannot write " + path);
  }
  for (const auto& [qid, docs] : qrels.judgments) {
    for (const auto& [doc, rel] : docs) {
      out << qid << " 0 " << doc << ' ' << rel << '\n';
    }
  }
}

RunFile read_run(const std::string& path) {
  std::ifstream in(path);
  if (!in) {
    throw Error(ErrorCode::IoError, "cannot open run " + path);
  }
  RunFile run;
  bool have_tag = false;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const auto fields = split_ws(line);
    if (fields.empty()) {
      continue;
    }
    if (fields.size() != 6) {
      throw Error(ErrorCode::ParseError,
                  where(path, line_no) + ": expected 'qid Q0 docid rank score tag'");
    }
    RunEntry entry;
    entry.doc_id = fields[2];
    try {
      entry.rank = static_cast<int>(parse_int(fields[3]));
      entry.score = parse_double(fields[4]);
    } catch (const Error&) {
      throw Error(ErrorCode::ParseError, where(path, line_no) + ": bad rank or score");
    }
    if (!have_tag) {
      run.tag = fields[5];
      have_tag = true;
    }
    run.queries[fields[0]].push_back(std::move(entry));
  }
  for (auto& [qid, entries] : run.queries) {
    std::stable_sort(entries.begin(), entries.end(),
                     [](const RunEntry& a, const RunEntry& b) { return a.rank < b.rank; });
    std::unordered_set<std::string> seen;
    for (std::size_t i = 0; i < entries.size(); ++i) {
      if (entries[i].rank != static_cast<int>(i) + 1) {
        throw Error(ErrorCode::InconsistentRanks, "query " + qid + ": ranks not contiguous from 1");
      }
      if (i > 0 && entries[i].score > entries[i - 1].score) {
        throw Error(ErrorCode::InconsistentRanks, "query " + qid + ": score increases at rank " +
                                                      std::to_string(entries[i].rank));
      }
      if (!seen.insert(entries[i].doc_id).second) {
        throw Error(ErrorCode::InconsistentRanks, "query " + qid + ": duplicate doc " + entries[i].doc_id);
      }
    }
  }
  return run;
}

void write_run(const std::string& path, const RunFile& run) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) {
    throw Error(ErrorCode::IoError, "cannot write " + path);
  }
  for (const auto& [qid, entries] : run.queries) {
    for (const auto& e : entries) {
      out << qid << " Q0 " << e.doc_id << ' ' << e.rank << ' ' << format_double(e.score) << ' '
          << run.tag << '\n';
    }
  }
}

}  // namespace tradrank
