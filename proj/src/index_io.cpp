// On-disk layout (one directory per index set):
//   manifest.txt          format version, document count, view list
//   docids.txt            doc_id per line in ordinal order
//   <view_id>/manifest.txt  N, avg_len, term count, view spec
//   <view_id>/dictionary.txt  term per line in id order
//   <view_id>/postings.bin    per term: df, then (doc delta, tf) varints
//   <view_id>/doclen.bin      per document: length varint
//   <view_id>/forward.bin     per document: length, then term id varints

#include <filesystem>
#include <fstream>
#include <iterator>
#include <sstream>

#include "tradrank/error.hpp"
#include "tradrank/index.hpp"
#include "tradrank/numfmt.hpp"

namespace tradrank {

namespace fs = std::filesystem;

namespace {

void put_varint(std::string& out, std::uint64_t value) {
  while (value >= 0x80) {
    out.push_back(static_cast<char>((value & 0x7F) | 0x80));
    value >>= 7;
  }
  out.push_back(static_cast<char>(value));
}

class VarintReader {
 public:
  VarintReader(const std::string& data, std::string name) : data_(data), name_(std::move(name)) {}

  std::uint64_t next() {
    std::uint64_t value = 0;
    int shift = 0;
    while (true) {
      if (pos_ >= data_.size() || shift > 63) {
        throw Error(ErrorCode::ParseError, "truncated varint stream in " + name_);
      }
      const auto byte = static_cast<unsigned char>(data_[pos_++]);
      value |= static_cast<std::uint64_t>(byte & 0x7F) << shift;
      if ((byte & 0x80) == 0) {
        return value;
      }
      shift += 7;
    }
  }

  bool done() const { return pos_ == data_.size(); }

 private:
  const std::string& data_;
  std::string name_;
  std::size_t pos_ = 0;
};

void write_file(const fs::path& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) {
    throw Error(ErrorCode::IoError, "cannot write " + path.string());
  }
  out.write(content.data(), static_cast<std::streamsize>(content.size()));
  if (!out) {
    throw Error(ErrorCode::IoError, "short write to " + path.string());
  }
}

std::string read_file(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) {
    throw Error(ErrorCode::MissingArtifact, "cannot read " + path.string());
  }
  return std::string(std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>());
}

std::vector<std::string> read_lines(const fs::path& path) {
  std::istringstream in(read_file(path));
  std::vector<std::string> lines;
  std::string line;
  while (std::getline(in, line)) {
    lines.push_back(line);
  }
  return lines;
}

// "key value" lines.
std::map<std::string, std::string> read_keyed(const fs::path& path) {
  std::map<std::string, std::string> out;
  for (const auto& line : read_lines(path)) {
    const auto space = line.find(' ');
    if (space == std::string::npos) {
      continue;
    }
    out[line.substr(0, space)] = line.substr(space + 1);
  }
  return out;
}

const std::string& require(const std::map<std::string, std::string>& kv, const std::string& key,
                           const fs::path& where) {
  auto it = kv.find(key);
  if (it == kv.end()) {
    throw Error(ErrorCode::ParseError, where.string() + ": missing key '" + key + "'");
  }
  return it->second;
}

void save_view(const ViewIndex& view, const fs::path& dir) {
  fs::create_directories(dir);
  const auto& inv = view.inverted;
  const auto& dict = inv.dictionary();

  std::ostringstream manifest;
  manifest << "format " << kIndexFormatVersion << '\n'
           << "view_id " << view.spec.view_id << '\n'
           << "source " << to_string(view.spec.source) << '\n'
           << "scheme " << (view.spec.scheme == Scheme::word ? "word" : "wordpiece") << '\n'
           << "lemmatize " << (view.spec.lemmatize ? 1 : 0) << '\n'
           << "stop " << (view.spec.stop ? 1 : 0) << '\n'
           << "N " << inv.num_docs() << '\n'
           << "avg_len " << format_double(inv.avg_len()) << '\n'
           << "terms " << dict.size() << '\n';
  write_file(dir / "manifest.txt", manifest.str());

  std::string terms;
  for (const auto& term : dict.terms()) {
    terms += term;
    terms += '\n';
  }
  write_file(dir / "dictionary.txt", terms);

  std::string postings;
  for (TermId t = 0; t < dict.size(); ++t) {
    const auto list = inv.postings(t);
    put_varint(postings, list.size());
    DocOrdinal prev = 0;
    for (const auto& p : list) {
      put_varint(postings, p.doc - prev);
      put_varint(postings, p.tf);
      prev = p.doc;
    }
  }
  write_file(dir / "postings.bin", postings);

  std::string lengths;
  for (auto len : inv.doc_lengths()) {
    put_varint(lengths, len);
  }
  write_file(dir / "doclen.bin", lengths);

  std::string forward;
  for (DocOrdinal d = 0; d < view.forward.num_docs(); ++d) {
    const auto tokens = view.forward.doc(d);
    put_varint(forward, tokens.size());
    for (TermId id : tokens) {
      put_varint(forward, id);
    }
  }
  write_file(dir / "forward.bin", forward);
}

ViewIndex load_view(const fs::path& dir, std::shared_ptr<const DocTable> docs) {
  const auto kv = read_keyed(dir / "manifest.txt");
  if (parse_int(require(kv, "format", dir)) != kIndexFormatVersion) {
    throw Error(ErrorCode::ParseError, dir.string() + ": unsupported index format");
  }
  FieldViewSpec spec;
  spec.view_id = require(kv, "view_id", dir);
  auto source = parse_view_source(require(kv, "source", dir));
  if (!source) {
    throw Error(ErrorCode::ParseError, dir.string() + ": bad view source");
  }
  spec.source = *source;
  spec.scheme = require(kv, "scheme", dir) == "wordpiece" ? Scheme::wordpiece : Scheme::word;
  spec.lemmatize = require(kv, "lemmatize", dir) == "1";
  spec.stop = require(kv, "stop", dir) == "1";
  const auto n_docs = static_cast<std::size_t>(parse_int(require(kv, "N", dir)));
  const auto n_terms = static_cast<std::size_t>(parse_int(require(kv, "terms", dir)));
  if (n_docs != docs->size()) {
    throw Error(ErrorCode::ParseError, dir.string() + ": document count mismatch");
  }

  auto dict = std::make_shared<TermDictionary>();
  for (const auto& term : read_lines(dir / "dictionary.txt")) {
    dict->add(term);
  }
  if (dict->size() != n_terms) {
    throw Error(ErrorCode::ParseError, dir.string() + ": dictionary size mismatch");
  }

  const std::string postings_data = read_file(dir / "postings.bin");
  VarintReader pr(postings_data, "postings.bin");
  std::vector<std::vector<Posting>> postings(n_terms);
  for (auto& list : postings) {
    const auto df = pr.next();
    list.reserve(df);
    DocOrdinal doc = 0;
    for (std::uint64_t i = 0; i < df; ++i) {
      doc += static_cast<DocOrdinal>(pr.next());
      list.push_back({doc, static_cast<std::uint32_t>(pr.next())});
    }
  }

  const std::string len_data = read_file(dir / "doclen.bin");
  VarintReader lr(len_data, "doclen.bin");
  std::vector<std::uint32_t> doc_len(n_docs);
  for (auto& len : doc_len) {
    len = static_cast<std::uint32_t>(lr.next());
  }

  const std::string fwd_data = read_file(dir / "forward.bin");
  VarintReader fr(fwd_data, "forward.bin");
  std::vector<std::uint64_t> offsets{0};
  std::vector<TermId> flat;
  for (std::size_t d = 0; d < n_docs; ++d) {
    const auto len = fr.next();
    for (std::uint64_t i = 0; i < len; ++i) {
      flat.push_back(static_cast<TermId>(fr.next()));
    }
    offsets.push_back(flat.size());
  }
  if (!pr.done() || !lr.done() || !fr.done()) {
    throw Error(ErrorCode::ParseError, dir.string() + ": trailing bytes in index files");
  }

  std::shared_ptr<const TermDictionary> shared = std::move(dict);
  ViewIndex view;
  view.spec = spec;
  view.inverted = InvertedIndex(spec.view_id, shared, docs, std::move(postings), std::move(doc_len));
  view.forward = ForwardIndex(spec.view_id, shared, std::move(offsets), std::move(flat));
  return view;
}

}  // namespace

void save_indices(const IndexSet& indices, const std::string& dir) {
  const fs::path root(dir);
  fs::create_directories(root);
  std::ostringstream manifest;
  manifest << "format " << kIndexFormatVersion << '\n' << "documents " << indices.docs->size() << '\n';
  for (const auto& [view_id, view] : indices.views) {
    if (view_id.find('/') != std::string::npos || view_id.empty() || view_id[0] == '.') {
      throw Error(ErrorCode::InvalidArgument, "view_id unusable as directory name: " + view_id);
    }
    manifest << "view " << view_id << '\n';
  }
  std::string ids;
  for (const auto& id : indices.docs->ids()) {
    ids += id;
    ids += '\n';
  }
  write_file(root / "docids.txt", ids);
  for (const auto& [view_id, view] : indices.views) {
    save_view(view, root / view_id);
  }
  // Manifest last: its presence marks a complete index.
  write_file(root / "manifest.txt", manifest.str());
}

IndexSet load_indices(const std::string& dir) {
  const fs::path root(dir);
  if (!fs::exists(root / "manifest.txt")) {
    throw Error(ErrorCode::MissingArtifact, "no index at " + dir + " (run the index stage first)");
  }
  std::vector<std::string> views;
  std::size_t n_docs = 0;
  int format = 0;
  for (const auto& line : read_lines(root / "manifest.txt")) {
    const auto space = line.find(' ');
    if (space == std::string::npos) continue;
    const auto key = line.substr(0, space);
    const auto value = line.substr(space + 1);
    if (key == "format") format = static_cast<int>(parse_int(value));
    else if (key == "documents") n_docs = static_cast<std::size_t>(parse_int(value));
    else if (key == "view") views.push_back(value);
  }
  if (format != kIndexFormatVersion) {
    throw Error(ErrorCode::ParseError, dir + ": unsupported index format");
  }
  auto docs = std::make_shared<DocTable>();
  for (const auto& id : read_lines(root / "docids.txt")) {
    docs->add(id);
  }
  if (docs->size() != n_docs) {
    throw Error(ErrorCode::ParseError, dir + ": docids.txt does not match manifest");
  }
  IndexSet set;
  set.docs = docs;
  for (const auto& view_id : views) {
    set.views.emplace(view_id, load_view(root / view_id, set.docs));
  }
  return set;
}

}  // namespace tradrank
