#pragma once

#include <functional>
#include <map>
#include <string>
#include <vector>

#include "tradrank/textproc.hpp"

namespace tradrank {

struct DocumentRecord {
  std::string doc_id;
  std::string url;
  std::string title;
  std::string body;

  const std::string& attribute(Attribute attr) const;
};

struct ReadStats {
  std::size_t accepted = 0;
  std::size_t skipped = 0;  // malformed lines
};

/// Reads an MS MARCO style TSV (docid, url, title, body) or, when the path
/// ends in .jsonl/.json, JSON lines with keys id/url/title/body. Malformed
/// lines are skipped and counted.
std::vector<DocumentRecord> read_corpus(const std::string& path, ReadStats* stats = nullptr);

/// Query file: `qid TAB text` per line. Lines without a tab are skipped.
using QuerySet = std::map<std::string, std::string>;
QuerySet read_queries(const std::string& path, ReadStats* stats = nullptr);
void write_queries(const std::string& path, const QuerySet& queries);

/// View construction over a whole document; ViewSource::all concatenates the
/// url, title and body token streams.
TokenSequence build_document_view(const DocumentRecord& doc, const FieldViewSpec& spec,
                                  const TextResources& resources);

}  // namespace tradrank
