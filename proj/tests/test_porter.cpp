#include <doctest.h>

#include <fstream>
#include <sstream>

#include "claimmatch/porter.hpp"
#include "claimmatch/util.hpp"

using namespace claimmatch;

namespace {

void check_golden_file(const std::string& path) {
  std::istringstream in(read_file(path));
  std::string line;
  int checked = 0;
  while (std::getline(in, line)) {
    if (line.empty() || line[0] == '#') continue;
    auto cols = split_tabs(line);
    REQUIRE(cols.size() == 2);
    CAPTURE(cols[0]);
    CHECK(porter_stem(cols[0]) == cols[1]);
    ++checked;
  }
  CHECK(checked > 50);
}

}  // namespace

TEST_CASE("published per-step examples") {
  check_golden_file(std::string(CLAIMMATCH_TEST_DATA) +
                    "/porter_published.tsv");
}

TEST_CASE("extra golden vocabulary") {
  check_golden_file(std::string(CLAIMMATCH_TEST_DATA) + "/porter_extra.tsv");
}

TEST_CASE("short words pass through") {
  CHECK(porter_stem("a") == "a");
  CHECK(porter_stem("is") == "is");
  CHECK(porter_stem("sky") == "sky");
}

TEST_CASE("classic multi-step reductions") {
  CHECK(porter_stem("caresses") == "caress");
  CHECK(porter_stem("ponies") == "poni");
  CHECK(porter_stem("relational") == "relat");
  CHECK(porter_stem("rationalization") == "ration");
  CHECK(porter_stem("troubling") == "troubl");
  CHECK(porter_stem("controllable") == "control");
  CHECK(porter_stem("generalization") == "gener");
}

TEST_CASE("revised step-2 rules") {
  // the two canonical revisions: -bli -> -ble, -logi -> -log
  CHECK(porter_stem("possibly") == "possibl");
  CHECK(porter_stem("analogi") == "analog");
}

TEST_CASE("utf8 input is untouched beyond ascii rules") {
  CHECK(porter_stem("café") == "café");
  CHECK(porter_stem("naïve") == "naïv");
}

TEST_CASE("fixed points and a known non-fixed point") {
  for (const char* w : {"caresses", "relational", "generalization", "feed"}) {
    auto once = porter_stem(w);
    CHECK(porter_stem(once) == once);
  }
  // the algorithm is not idempotent in general
  CHECK(porter_stem("agreed") == "agre");
  CHECK(porter_stem("agre") == "agr");
}
