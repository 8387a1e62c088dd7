#include "tocucrl/keywords.hpp"

#include <charconv>
#include <fstream>
#include <sstream>

namespace tocucrl {

namespace {

std::vector<std::string> tokens(const std::string& text) {
  std::string cleaned = text;
  for (char& c : cleaned) {
    if (c == ',' || c == ';') c = ' ';
  }
  std::istringstream in(cleaned);
  std::vector<std::string> out;
  for (std::string tok; in >> tok;) out.push_back(tok);
  return out;
}

bool parse_real(const std::string& tok, double& value) {
  try {
    std::size_t used = 0;
    value = std::stod(tok, &used);
    return used == tok.size();
  } catch (const std::exception&) {
    return false;
  }
}

}  // namespace

std::pair<std::string, std::string> split_keyword(const std::string& keyword) {
  const auto colon = keyword.find(':');
  if (colon == std::string::npos) return {keyword, ""};
  return {keyword.substr(0, colon), keyword.substr(colon + 1)};
}

std::vector<std::size_t> parse_size_list(const std::string& args, std::size_t expected,
                                         const std::string& context) {
  std::vector<std::size_t> out;
  for (const auto& tok : tokens(args)) {
    std::size_t v = 0;
    const auto* end = tok.data() + tok.size();
    const auto [ptr, ec] = std::from_chars(tok.data(), end, v);
    if (ec != std::errc() || ptr != end) {
      throw UsageError("'" + context + "': expected an integer, got '" + tok + "'");
    }
    out.push_back(v);
  }
  if (out.size() != expected) {
    throw UsageError("'" + context + "': expected " + std::to_string(expected) + " integers");
  }
  return out;
}

Vec parse_reals_or_file(const std::string& text) {
  Vec values;
  bool ok = true;
  for (const auto& tok : tokens(text)) {
    double v = 0.0;
    if (!parse_real(tok, v)) {
      ok = false;
      break;
    }
    values.push_back(v);
  }
  if (ok && !values.empty()) return values;

  std::ifstream in(text);
  if (!in) throw UsageError("cannot parse '" + text + "' as numbers or open it as a file");
  std::ostringstream buffer;
  buffer << in.rdbuf();
  values.clear();
  for (const auto& tok : tokens(buffer.str())) {
    double v = 0.0;
    if (!parse_real(tok, v)) throw UsageError("bad number '" + tok + "' in " + text);
    values.push_back(v);
  }
  if (values.empty()) throw UsageError("no numbers in " + text);
  return values;
}

}  // namespace tocucrl
