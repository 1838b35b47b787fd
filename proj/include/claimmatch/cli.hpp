#pragma once

#include <string>
#include <vector>

#include "claimmatch/textnorm.hpp"

namespace claimmatch {

// Options shared across subcommands; each command reads the slice it needs.
// Every output file carries a hash of the effective configuration so runs
// are attributable and reproducible.
struct PipelineConfig {
  std::string tweets_path;
  std::string articles_path;
  std::string qrels_path;
  std::string output_path;
  std::string stopwords_path;  // empty selects the built-in list
  bool keep_handles = false;
  bool no_stem = false;
  std::string strategy = "jaccard";
  double threshold = 0.3;
  std::string target = "best";
  std::uint64_t seed = 42;

  NormConfig norm_config() const;
};

// Built-in English stopword list used when no file is given.
const std::vector<std::string>& default_stopwords();

// Entry point shared by the binary and in-process tests. args excludes the
// program name. Returns the process exit code: 0 ok, 1 usage, 2 data error,
// 3 numerical error.
int run_cli(const std::vector<std::string>& args);

}  // namespace claimmatch
