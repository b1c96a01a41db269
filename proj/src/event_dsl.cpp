#include "htp/event_dsl.hpp"

#include <regex>
#include <stdexcept>

namespace htp {

namespace {

std::int64_t to_int(const std::string& s, const std::string& ctx) {
  std::size_t used = 0;
  long long v = 0;
  try {
    v = std::stoll(s, &used);
  } catch (const std::exception&) {
    used = 0;
  }
  if (used != s.size() || s.empty()) throw std::invalid_argument("event: bad integer '" + s + "' in " + ctx);
  return v;
}

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t");
  if (b == std::string::npos) return "";
  return s.substr(b, s.find_last_not_of(" \t") - b + 1);
}

}  // namespace

StopCondition parse_stop(const std::string& raw) {
  const std::string text = trim(raw);
  const auto colon = text.find(':');
  if (colon == std::string::npos) throw std::invalid_argument("event: stop condition needs kind:value, got '" + text + "'");
  const std::string kind = text.substr(0, colon), arg = text.substr(colon + 1);
  if (kind == "hit") return StopCondition::hit(to_int(arg, text));
  if (kind == "up") return StopCondition::up(to_int(arg, text));
  if (kind == "down") return StopCondition::down(to_int(arg, text));
  if (kind == "set") {
    std::vector<std::int64_t> pts;
    std::size_t start = 0;
    for (;;) {
      const auto bar = arg.find('|', start);
      pts.push_back(to_int(arg.substr(start, bar - start), text));
      if (bar == std::string::npos) break;
      start = bar + 1;
    }
    return StopCondition::set(pts);
  }
  if (kind == "out") {
    const auto c2 = arg.find(':', arg[0] == '-' ? 1 : 0);
    if (c2 == std::string::npos) throw std::invalid_argument("event: out needs lo:hi");
    const auto lo = to_int(arg.substr(0, c2), text), hi = to_int(arg.substr(c2 + 1), text);
    if (lo >= hi) throw std::invalid_argument("event: out needs lo < hi");
    return StopCondition::exit(lo, hi);
  }
  throw std::invalid_argument("event: unknown stop kind '" + kind + "'");
}

RaceSpec parse_event(const std::string& text) {
  static const std::regex re(R"(^\s*race\s*\(([^,]+),([^)]+)\)\s*from\s+(-?\d+)\s*$)");
  std::smatch m;
  if (!std::regex_match(text, m, re)) throw std::invalid_argument("event: expected 'race(<stop>, <stop>) from <x>', got '" + text + "'");
  RaceSpec r;
  r.first = parse_stop(m[1].str());
  r.second = parse_stop(m[2].str());
  r.start = to_int(m[3].str(), text);
  return r;
}

}  // namespace htp
