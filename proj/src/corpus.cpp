#include "tradrank/corpus.hpp"

#include <json.hpp>

#include <fstream>
#include <iostream>

#include "tradrank/error.hpp"

namespace tradrank {

const std::string& DocumentRecord::attribute(Attribute attr) const {
  switch (attr) {
    case Attribute::url: return url;
    case Attribute::title: return title;
    case Attribute::body: return body;
  }
  return body;
}

namespace {

bool has_suffix(const std::string& s, std::string_view suffix) {
  return s.size() >= suffix.size() && s.compare(s.size() - suffix.size(), suffix.size(), suffix) == 0;
}

std::vector<std::string_view> split_tabs(std::string_view line) {
  std::vector<std::string_view> parts;
  std::size_t start = 0;
  while (true) {
    const std::size_t tab = line.find('\t', start);
    if (tab == std::string_view::npos) {
      parts.push_back(line.substr(start));
      return parts;
    }
    parts.push_back(line.substr(start, tab - start));
    start = tab + 1;
  }
}

std::optional<DocumentRecord> parse_tsv_doc(std::string_view line) {
  auto parts = split_tabs(line);
  if (parts.size() != 4 || parts[0].empty()) {
    return std::nullopt;
  }
  return DocumentRecord{std::string(parts[0]), std::string(parts[1]), std::string(parts[2]),
                        std::string(parts[3])};
}

std::optional<DocumentRecord> parse_json_doc(const std::string& line) {
  auto j = nlohmann::json::parse(line, nullptr, /*allow_exceptions=*/false);
  if (!j.is_object()) {
    return std::nullopt;
  }
  auto text = [&](const char* key) -> std::optional<std::string> {
    auto it = j.find(key);
    if (it == j.end() || it->is_null()) return std::string();
    if (!it->is_string()) return std::nullopt;
    return it->get<std::string>();
  };
  auto id_it = j.find("id");
  if (id_it == j.end()) {
    return std::nullopt;
  }
  std::string id;
  if (id_it->is_string()) {
    id = id_it->get<std::string>();
  } else if (id_it->is_number_integer()) {
    id = std::to_string(id_it->get<long long>());
  } else {
    return std::nullopt;
  }
  auto url = text("url");
  auto title = text("title");
  auto body = text("body");
  if (id.empty() || !url || !title || !body) {
    return std::nullopt;
  }
  return DocumentRecord{std::move(id), std::move(*url), std::move(*title), std::move(*body)};
}

void strip_cr(std::string& line) {
  if (!line.empty() && line.back() == '\r') {
    line.pop_back();
  }
}

}  // namespace

std::vector<DocumentRecord> read_corpus(const std::string& path, ReadStats* stats) {
  std::ifstream in(path);
  if (!in) {
    throw Error(ErrorCode::IoError, "cannot open corpus " + path);
  }
  const bool json = has_suffix(path, ".jsonl") || has_suffix(path, ".json");
  std::vector<DocumentRecord> docs;
  ReadStats local;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    strip_cr(line);
    if (line.empty()) {
      continue;
    }
    auto doc = json ? parse_json_doc(line) : parse_tsv_doc(line);
    if (!doc) {
      ++local.skipped;
      std::cerr << "warning: " << path << ":" << line_no << ": malformed document skipped\n";
      continue;
    }
    docs.push_back(std::move(*doc));
    ++local.accepted;
  }
  if (stats) {
    *stats = local;
  }
  return docs;
}

QuerySet read_queries(const std::string& path, ReadStats* stats) {
  std::ifstream in(path);
  if (!in) {
    throw Error(ErrorCode::IoError, "cannot open queries " + path);
  }
  QuerySet queries;
  ReadStats local;
  std::string line;
  while (std::getline(in, line)) {
    strip_cr(line);
    if (line.empty()) {
      continue;
    }
    const auto tab = line.find('\t');
    if (tab == std::string::npos || tab == 0) {
      ++local.skipped;
      continue;
    }
    queries[line.substr(0, tab)] = line.substr(tab + 1);
    ++local.accepted;
  }
  if (stats) {
    *stats = local;
  }
  return queries;
}

void write_queries(const std::string& path, const QuerySet& queries) {
  std::ofstream out(path, std::ios::binary);
  if (!out) {
    throw Error(ErrorCode::IoError, "cannot write " + path);
  }
  for (const auto& [qid, text] : queries) {
    out << qid << '\t' << text << '\n';
  }
}

TokenSequence build_document_view(const DocumentRecord& doc, const FieldViewSpec& spec,
                                  const TextResources& resources) {
  const WordPieceVocab* vocab = resources.vocab ? &*resources.vocab : nullptr;
  auto one = [&](Attribute attr) {
    FieldViewSpec single = spec;
    single.source = attr == Attribute::url     ? ViewSource::url
                    : attr == Attribute::title ? ViewSource::title
                                               : ViewSource::body;
    return build_view(RawAttribute{attr, doc.attribute(attr)}, single, resources.stoplist, vocab);
  };
  switch (spec.source) {
    case ViewSource::url: return one(Attribute::url);
    case ViewSource::title: return one(Attribute::title);
    case ViewSource::body: return one(Attribute::body);
    case ViewSource::all: break;
  }
  TokenSequence all{spec.view_id, {}};
  for (Attribute attr : {Attribute::url, Attribute::title, Attribute::body}) {
    auto part = one(attr);
    all.tokens.insert(all.tokens.end(), std::make_move_iterator(part.tokens.begin()),
                      std::make_move_iterator(part.tokens.end()));
  }
  return all;
}

}  // namespace tradrank
