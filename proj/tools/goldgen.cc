// Regenerates the gold corpus and gold.tsv of a fixture directory from its
// markup.txt.

#include <iostream>

#include "gold_markup.h"

int main(int argc, char **argv) {
  if (argc != 2) {
    std::cerr << "usage: geoscope_goldgen <fixture-dir>\n";
    return 2;
  }
  try {
    std::filesystem::path dir = argv[1];
    auto fixture = geoscope::load_gold_markup(dir / "markup.txt");
    geoscope::write_gold_fixture(fixture, dir);
    std::cout << fixture.documents.size() << " documents, " << fixture.gold.spans.size() << " gold spans\n";
  } catch (const std::exception &e) {
    std::cerr << "geoscope_goldgen: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
