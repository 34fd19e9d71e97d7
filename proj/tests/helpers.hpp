#pragma once

#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "commands.hpp"
#include "dat/dat.hpp"

namespace testing_util {

inline std::string fixture(const std::string& name) { return std::string(DAT_FIXTURES) + "/" + name; }

inline std::string slurp(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

inline dat::EventLog load(const std::string& name) {
  return dat::parse_event_log(std::string_view(slurp(fixture(name))));
}

struct CliResult {
  int code;
  std::string out;
  std::string err;
};

inline CliResult cli(const std::vector<std::string>& args) {
  std::ostringstream out, err;
  int code = datctl::run(args, out, err);
  return {code, out.str(), err.str()};
}

inline std::string temp_path(const std::string& name) {
  return (std::filesystem::temp_directory_path() / ("dat_test_" + name)).string();
}

inline void write_file(const std::string& path, const std::string& content) {
  std::ofstream(path, std::ios::binary) << content;
}

// Fig-2 timestamps are seconds after 09:00 on 2024-01-01 UTC.
inline constexpr dat::Millis kFig2Base = 1704099600000;
inline constexpr dat::Millis fig2(dat::Millis seconds) { return kFig2Base + seconds * dat::kSecond; }

}  // namespace testing_util
