#pragma once

#include <string_view>

namespace trollguard::resources {

// Copies of data/*.txt|json|tsv compiled into the library.
std::string_view default_rules_json() noexcept;
std::string_view default_stoplist() noexcept;
std::string_view default_lexicon() noexcept;
std::string_view default_negators() noexcept;

}  // namespace trollguard::resources
