#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <set>

#include "claimmatch/errors.hpp"
#include "claimmatch/matrix.hpp"
#include "claimmatch/rng.hpp"
#include "claimmatch/util.hpp"

using namespace claimmatch;

TEST_CASE("fnv1a64 known vectors") {
  // reference values of the 64-bit FNV-1a parameters
  CHECK(fnv1a64("") == 0xcbf29ce484222325ull);
  CHECK(fnv1a64("a") == 0xaf63dc4c8601ec8cull);
  CHECK(fnv1a64("foobar") == 0x85944171f73967e8ull);
}

TEST_CASE("to_hex is zero padded") {
  CHECK(to_hex(0) == "0000000000000000");
  CHECK(to_hex(0xabcull) == "0000000000000abc");
}

TEST_CASE("format_double trims trailing noise") {
  CHECK(format_double(0.5) == "0.5");
  CHECK(format_double(1.0) == "1");
  CHECK(format_double(0.1694444444) == "0.1694444444");
}

TEST_CASE("atomic_write_file replaces content and read_file round trips") {
  auto dir = std::filesystem::temp_directory_path() / "claimmatch_util_test";
  std::filesystem::create_directories(dir);
  auto path = (dir / "out.txt").string();
  atomic_write_file(path, "first");
  atomic_write_file(path, "second");
  CHECK(read_file(path) == "second");
  for (const auto& entry : std::filesystem::directory_iterator(dir))
    CHECK(entry.path().filename() == "out.txt");  // no tmp leftovers
  std::filesystem::remove_all(dir);
}

TEST_CASE("read_file missing path throws IoError") {
  CHECK_THROWS_AS(read_file("/nonexistent/claimmatch"), IoError);
}

TEST_CASE("split_tabs keeps empty fields") {
  auto cols = split_tabs("a\t\tb");
  REQUIRE(cols.size() == 3);
  CHECK(cols[0] == "a");
  CHECK(cols[1] == "");
  CHECK(cols[2] == "b");
}

TEST_CASE("trim strips ascii whitespace") {
  CHECK(trim("  x \t\r\n") == "x");
  CHECK(trim("") == "");
  CHECK(trim(" \t ") == "");
}

TEST_CASE("rng is deterministic per seed") {
  Rng a(123), b(123), c(7);
  bool all_equal = true;
  bool any_diff = false;
  for (int i = 0; i < 100; ++i) {
    double x = a.uniform();
    all_equal = all_equal && x == b.uniform();
    any_diff = any_diff || x != c.uniform();
    CHECK(x >= 0.0);
    CHECK(x < 1.0);
  }
  CHECK(all_equal);
  CHECK(any_diff);
}

TEST_CASE("rng index covers the range") {
  Rng rng(5);
  std::set<std::size_t> seen;
  for (int i = 0; i < 200; ++i) {
    auto v = rng.index(4);
    CHECK(v < 4);
    seen.insert(v);
  }
  CHECK(seen.size() == 4);
}

TEST_CASE("rng shuffle is a permutation") {
  Rng rng(9);
  std::vector<int> v{1, 2, 3, 4, 5, 6, 7, 8};
  auto orig = v;
  rng.shuffle(v);
  CHECK(std::multiset<int>(v.begin(), v.end()) ==
        std::multiset<int>(orig.begin(), orig.end()));
}

TEST_CASE("matrix indexing and dot") {
  Matrix m(2, 3);
  m.at(0, 0) = 1;
  m.at(1, 2) = 5;
  CHECK(m.row(1)[2] == 5);
  std::vector<double> a{1, 2, 3}, b{4, 5, 6};
  CHECK(dot(a, b) == doctest::Approx(32).epsilon(1e-12));
  CHECK(l2_norm(a) == doctest::Approx(std::sqrt(14)).epsilon(1e-12));
}

TEST_CASE("axpy accumulates") {
  std::vector<double> y{1, 1};
  std::vector<double> x{2, 3};
  axpy(0.5, x, y);
  CHECK(y[0] == doctest::Approx(2));
  CHECK(y[1] == doctest::Approx(2.5));
}
