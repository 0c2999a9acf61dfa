#ifndef GEOSCOPE_TOOLS_GOLD_MARKUP_H_
#define GEOSCOPE_TOOLS_GOLD_MARKUP_H_

// Reader for the gold corpus markup in fixtures/gold/markup.txt.

#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

#include "geoscope/corpus_model.h"
#include "geoscope/eval.h"

namespace geoscope {

struct GoldFixture {
  std::vector<DocumentRecord> documents;  // in markup order
  GoldCorpus gold;
};

// Blocks start with "@@ doc_id | language | YYYY[-MM[-DD]] | title"; the
// abstract lines that follow are joined with single spaces. "[[kind:text]]"
// marks a gold span over text. '#' lines outside blocks are comments.
// Throws MalformedInput naming the line.
GoldFixture parse_gold_markup(std::string_view markup);
GoldFixture load_gold_markup(const std::filesystem::path &path);

// Writes <dir>/corpus/<doc>.xml as MODS-TI records and <dir>/gold.tsv.
void write_gold_fixture(const GoldFixture &fixture, const std::filesystem::path &dir);

}  // namespace geoscope

#endif  // GEOSCOPE_TOOLS_GOLD_MARKUP_H_
