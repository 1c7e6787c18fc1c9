#include "duality/angles.hpp"

#include <cctype>
#include <charconv>
#include <cmath>
#include <stdexcept>
#include <string>
#include <utility>

#include "duality/qstate.hpp"

namespace duality {
namespace {

[[noreturn]] void fail(std::string_view text) {
  throw std::invalid_argument("cannot parse angle '" + std::string(text) + "'");
}

// Consumes a leading unsigned decimal number; returns false if there is none.
bool take_number(std::string_view& s, double& value) {
  if (s.empty() || !(std::isdigit(static_cast<unsigned char>(s.front())) || s.front() == '.')) {
    return false;
  }
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), value);
  if (ec != std::errc{}) return false;
  s.remove_prefix(static_cast<std::size_t>(ptr - s.data()));
  return true;
}

}  // namespace

double parse_angle(std::string_view text) {
  std::string compact;
  for (char c : text) {
    if (!std::isspace(static_cast<unsigned char>(c))) compact.push_back(c);
  }
  std::string_view s = compact;
  if (s.empty()) fail(text);

  double sign = 1.0;
  if (s.front() == '+' || s.front() == '-') {
    if (s.front() == '-') sign = -1.0;
    s.remove_prefix(1);
  }
  double value = 1.0;
  const bool has_number = take_number(s, value);
  bool has_pi = false;
  if (!s.empty() && s.front() == '*') {
    if (!has_number) fail(text);
    s.remove_prefix(1);
    if (s.substr(0, 2) != "pi") fail(text);
  }
  if (s.substr(0, 2) == "pi") {
    has_pi = true;
    s.remove_prefix(2);
  }
  if (!has_number && !has_pi) fail(text);
  if (!s.empty() && s.front() == '/') {
    s.remove_prefix(1);
    double denominator = 0.0;
    if (!take_number(s, denominator) || denominator == 0.0) fail(text);
    value /= denominator;
  }
  if (!s.empty()) fail(text);
  const double out = sign * value * (has_pi ? kPi : 1.0);
  if (!std::isfinite(out)) fail(text);
  return out;
}

std::pair<int, int> parse_grid(std::string_view text) {
  const auto x = text.find('x');
  if (x == std::string_view::npos) {
    throw std::invalid_argument("grid must look like RxC, got '" + std::string(text) + "'");
  }
  auto parse_part = [&](std::string_view part) {
    int v = 0;
    const auto [ptr, ec] = std::from_chars(part.data(), part.data() + part.size(), v);
    if (ec != std::errc{} || ptr != part.data() + part.size() || v < 1) {
      throw std::invalid_argument("grid must look like RxC, got '" + std::string(text) + "'");
    }
    return v;
  };
  return {parse_part(text.substr(0, x)), parse_part(text.substr(x + 1))};
}

}  // namespace duality
