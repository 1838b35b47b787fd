#pragma once

#include <string>
#include <string_view>

namespace claimmatch {

// Classic 5-step suffix-stripping stemmer (Porter, 1980), including the
// author's two canonical revisions to step 2 (BLI->BLE, LOGI->LOG).
// Input is expected to be lowercase; words of length <= 2 are returned
// unchanged. Non-ASCII bytes are treated as consonants, so UTF-8 input
// passes through safely.
std::string porter_stem(std::string_view word);

}  // namespace claimmatch
