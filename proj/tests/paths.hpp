#pragma once

#include <filesystem>

namespace nzsim::testing {

inline std::filesystem::path source_dir() { return NZSIM_SOURCE_DIR; }
inline std::filesystem::path scenario(const char* name) {
  return source_dir() / "scenarios" / name;
}

}  // namespace nzsim::testing
