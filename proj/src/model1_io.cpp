#include <fstream>
#include <sstream>

#include "tradrank/error.hpp"
#include "tradrank/model1.hpp"
#include "tradrank/numfmt.hpp"

namespace tradrank {

namespace {

constexpr std::string_view kTableMagic = "#model1-table v1";

std::string join(const Tokens& tokens) {
  std::string out;
  for (std::size_t i = 0; i < tokens.size(); ++i) {
    if (i > 0) out.push_back(' ');
    out += tokens[i];
  }
  return out;
}

Tokens split_spaces(std::string_view text) {
  Tokens out;
  std::size_t start = 0;
  while (start <= text.size()) {
    const auto space = text.find(' ', start);
    const auto end = space == std::string_view::npos ? text.size() : space;
    if (end > start) out.emplace_back(text.substr(start, end - start));
    if (space == std::string_view::npos) break;
    start = space + 1;
  }
  return out;
}

}  // namespace

void write_bitext(const std::string& path, const std::vector<BitextPair>& bitext) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) {
    throw Error(ErrorCode::IoError, "cannot write " + path);
  }
  for (const auto& pair : bitext) {
    out << join(pair.target) << '\t' << join(pair.source) << '\n';
  }
}

std::vector<BitextPair> read_bitext(const std::string& path) {
  std::ifstream in(path);
  if (!in) {
    throw Error(ErrorCode::MissingArtifact, "cannot read bitext " + path);
  }
  std::vector<BitextPair> bitext;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    const auto tab = line.find('\t');
    if (tab == std::string::npos) {
      throw Error(ErrorCode::ParseError, path + ":" + std::to_string(line_no) + ": missing tab");
    }
    bitext.push_back({split_spaces(std::string_view(line).substr(0, tab)),
                      split_spaces(std::string_view(line).substr(tab + 1))});
  }
  return bitext;
}

void write_table(const std::string& path, const TranslationTable& table) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) {
    throw Error(ErrorCode::IoError, "cannot write " + path);
  }
  out << kTableMagic << " source_vocab=" << table.source_size()
      << " target_vocab=" << table.target_size() << " entries=" << table.num_entries()
      << " iterations=" << table.meta().iterations
      << " bitext_pairs=" << table.meta().bitext_pairs << '\n';
  // Source ids are already in lexicographic order; rows are sorted by
  // descending probability.
  for (std::uint32_t s = 0; s < table.source_size(); ++s) {
    for (const auto& cell : table.row(s)) {
      out << table.source_term(s) << '\t' << table.target_term(cell.target) << '\t'
          << format_double(cell.prob) << '\n';
    }
  }
}

TranslationTable read_table(const std::string& path) {
  std::ifstream in(path);
  if (!in) {
    throw Error(ErrorCode::MissingArtifact, "cannot read translation table " + path);
  }
  std::string header;
  if (!std::getline(in, header) || header.rfind(kTableMagic, 0) != 0) {
    throw Error(ErrorCode::ParseError, path + ":1: not a translation table");
  }
  std::map<std::string, long long> fields;
  {
    std::istringstream hs(header.substr(kTableMagic.size()));
    std::string kv;
    while (hs >> kv) {
      const auto eq = kv.find('=');
      if (eq == std::string::npos) {
        throw Error(ErrorCode::ParseError, path + ":1: bad header field '" + kv + "'");
      }
      fields[kv.substr(0, eq)] = parse_int(std::string_view(kv).substr(eq + 1));
    }
  }
  for (const char* key : {"source_vocab", "target_vocab", "entries", "iterations", "bitext_pairs"}) {
    if (!fields.contains(key)) {
      throw Error(ErrorCode::ParseError, path + ":1: header lacks " + key);
    }
  }
  std::vector<TranslationEntry> entries;
  std::string line;
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    const auto t1 = line.find('\t');
    const auto t2 = t1 == std::string::npos ? std::string::npos : line.find('\t', t1 + 1);
    if (t2 == std::string::npos) {
      throw Error(ErrorCode::ParseError, path + ":" + std::to_string(line_no) + ": expected 3 fields");
    }
    double prob = 0.0;
    try {
      prob = parse_double(std::string_view(line).substr(t2 + 1));
    } catch (const Error&) {
      throw Error(ErrorCode::ParseError, path + ":" + std::to_string(line_no) + ": bad probability");
    }
    entries.push_back({line.substr(0, t1), line.substr(t1 + 1, t2 - t1 - 1), prob});
  }
  TranslationTable table(std::move(entries),
                         {static_cast<int>(fields["iterations"]),
                          static_cast<std::size_t>(fields["bitext_pairs"])});
  if (static_cast<long long>(table.source_size()) != fields["source_vocab"] ||
      static_cast<long long>(table.target_size()) != fields["target_vocab"] ||
      static_cast<long long>(table.num_entries()) != fields["entries"]) {
    throw Error(ErrorCode::ParseError, path + ": header counts do not match entries");
  }
  return table;
}

}  // namespace tradrank
