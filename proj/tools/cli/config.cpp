#include "config.hpp"

#include "cfs/errors.hpp"

#include <fstream>
#include <sstream>

namespace cfs::cli {

namespace {

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

std::string unquote(std::string v) {
  if (v.size() >= 2 && (v.front() == '"' || v.front() == '\'') && v.back() == v.front()) {
    return v.substr(1, v.size() - 2);
  }
  return v;
}

bool flag_present(const std::vector<std::string>& args, const std::string& name) {
  for (const auto& a : args) {
    if (a == name || a.rfind(name + "=", 0) == 0) return true;
  }
  return false;
}

}  // namespace

std::vector<std::pair<std::string, std::string>> read_key_values(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot read config file " + path.string());
  std::vector<std::pair<std::string, std::string>> out;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    line = trim(line.substr(0, line.find('#')));
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) {
      throw DataError(path.string() + ":" + std::to_string(lineno) + ": expected key=value");
    }
    out.emplace_back(trim(line.substr(0, eq)), unquote(trim(line.substr(eq + 1))));
  }
  return out;
}

std::vector<std::string> merge_config(const CLI::App& sub, std::vector<std::string> args,
                                      const std::string& config_flag_a, const std::string& config_flag_b) {
  std::string path;
  for (std::size_t i = 0; i < args.size(); ++i) {
    for (const auto& flag : {config_flag_a, config_flag_b}) {
      if (args[i] == flag && i + 1 < args.size()) path = args[i + 1];
      if (args[i].rfind(flag + "=", 0) == 0) path = args[i].substr(flag.size() + 1);
    }
  }
  if (path.empty()) return args;
  for (const auto& [key, value] : read_key_values(path)) {
    const std::string flag = "--" + key;
    if (sub.get_option_no_throw(flag) == nullptr) {
      throw CLI::ValidationError(path + ": unknown key '" + key + "'");
    }
    if (!flag_present(args, flag)) args.push_back(flag + "=" + value);
  }
  return args;
}

std::string manifest_text(const CLI::App& sub) {
  std::ostringstream out;
  out << "# cfs " << sub.get_name() << "\n";
  for (const CLI::Option* opt : sub.get_options()) {
    const std::string name = opt->get_single_name();
    if (name == "help" || name == "config" || opt->get_lnames().empty()) continue;
    std::string value;
    if (opt->count() > 0) {
      const auto& results = opt->results();
      for (std::size_t i = 0; i < results.size(); ++i) value += (i ? "," : "") + results[i];
    } else {
      value = opt->get_default_str();
      if (value.empty() && opt->get_type_size() == 0) value = "false";
    }
    if (value.empty()) continue;
    out << opt->get_lnames().front() << "=" << value << "\n";
  }
  return out.str();
}

void write_manifest(const std::filesystem::path& dir, const CLI::App& sub) {
  std::filesystem::create_directories(dir);
  std::ofstream out(dir / "manifest.txt", std::ios::binary);
  out << manifest_text(sub);
  if (!out) throw DataError("cannot write " + (dir / "manifest.txt").string());
}

}  // namespace cfs::cli
