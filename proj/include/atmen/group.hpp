#pragma once

#include <algorithm>
#include <cctype>
#include <charconv>
#include <compare>
#include <cstdint>
#include <deque>
#include <optional>
#include <string>
#include <string_view>
#include <unordered_map>
#include <unordered_set>
#include <variant>
#include <vector>

#include "atmen/defaults.hpp"
#include "atmen/errors.hpp"

namespace atmen::groups {

enum class FactorKind { Free, FreeAbelian, Cyclic };

struct Factor {
  FactorKind kind;
  long param;  // free rank k / abelian rank d / cyclic order m
  friend bool operator==(const Factor&, const Factor&) = default;
};

/// Direct product of free, free-abelian, and cyclic factors with the
/// standard generating set (free generators and inverses, unit vectors,
/// the cyclic generator).
class GroupSpec {
 public:
  GroupSpec() = default;

  explicit GroupSpec(std::vector<Factor> factors) : factors_(std::move(factors)) {
    if (factors_.empty()) throw input_error("group spec needs at least one factor");
    for (const auto& f : factors_) {
      if (f.param < 1) throw input_error("factor parameter must be >= 1 in " + to_string());
    }
  }

  /// Grammar: `F<k>`, `Z^<d>` (or bare `Z`), `C<m>`, joined by `x`.
  /// Examples: "F2", "Z", "Z^2 x C3".
  static GroupSpec parse(std::string_view text);

  const std::vector<Factor>& factors() const { return factors_; }

  std::string to_string() const {
    std::string out;
    for (std::size_t i = 0; i < factors_.size(); ++i) {
      if (i) out += " x ";
      const auto& f = factors_[i];
      switch (f.kind) {
        case FactorKind::Free: out += "F" + std::to_string(f.param); break;
        case FactorKind::FreeAbelian:
          out += (f.param == 1) ? "Z" : ("Z^" + std::to_string(f.param));
          break;
        case FactorKind::Cyclic: out += "C" + std::to_string(f.param); break;
      }
    }
    return out;
  }

  friend bool operator==(const GroupSpec&, const GroupSpec&) = default;

 private:
  std::vector<Factor> factors_;
};

// Per-factor normal forms. Free words are reduced sequences of signed
// 1-based generator indices; cyclic residues live in [0, m).
struct FreeWord {
  std::vector<std::int32_t> letters;
  friend bool operator==(const FreeWord&, const FreeWord&) = default;
  friend auto operator<=>(const FreeWord&, const FreeWord&) = default;
};

struct AbelianVec {
  std::vector<std::int64_t> coords;
  friend bool operator==(const AbelianVec&, const AbelianVec&) = default;
  friend auto operator<=>(const AbelianVec&, const AbelianVec&) = default;
};

struct CyclicRes {
  std::int64_t r = 0;
  friend bool operator==(const CyclicRes&, const CyclicRes&) = default;
  friend auto operator<=>(const CyclicRes&, const CyclicRes&) = default;
};

using FactorElement = std::variant<FreeWord, AbelianVec, CyclicRes>;

class GroupElement {
 public:
  GroupElement() = default;
  GroupElement(GroupSpec spec, std::vector<FactorElement> parts)
      : spec_(std::move(spec)), parts_(std::move(parts)) {}

  const GroupSpec& spec() const { return spec_; }
  const std::vector<FactorElement>& parts() const { return parts_; }

  friend bool operator==(const GroupElement&, const GroupElement&) = default;

 private:
  GroupSpec spec_;
  std::vector<FactorElement> parts_;
};

inline GroupElement identity(const GroupSpec& spec) {
  std::vector<FactorElement> parts;
  parts.reserve(spec.factors().size());
  for (const auto& f : spec.factors()) {
    switch (f.kind) {
      case FactorKind::Free: parts.emplace_back(FreeWord{}); break;
      case FactorKind::FreeAbelian:
        parts.emplace_back(AbelianVec{std::vector<std::int64_t>(f.param, 0)});
        break;
      case FactorKind::Cyclic: parts.emplace_back(CyclicRes{0}); break;
    }
  }
  return GroupElement(spec, std::move(parts));
}

namespace detail {

inline void append_reduced(std::vector<std::int32_t>& word, std::int32_t letter) {
  if (!word.empty() && word.back() == -letter) {
    word.pop_back();
  } else {
    word.push_back(letter);
  }
}

}  // namespace detail

inline GroupElement multiply(const GroupElement& g, const GroupElement& h) {
  if (g.spec() != h.spec()) {
    throw input_error("cannot multiply elements of " + g.spec().to_string() + " and " +
                      h.spec().to_string());
  }
  const auto& factors = g.spec().factors();
  std::vector<FactorElement> parts;
  parts.reserve(factors.size());
  for (std::size_t i = 0; i < factors.size(); ++i) {
    switch (factors[i].kind) {
      case FactorKind::Free: {
        const auto& a = std::get<FreeWord>(g.parts()[i]);
        const auto& b = std::get<FreeWord>(h.parts()[i]);
        FreeWord out = a;
        for (auto letter : b.letters) detail::append_reduced(out.letters, letter);
        parts.emplace_back(std::move(out));
        break;
      }
      case FactorKind::FreeAbelian: {
        const auto& a = std::get<AbelianVec>(g.parts()[i]);
        const auto& b = std::get<AbelianVec>(h.parts()[i]);
        AbelianVec out = a;
        for (std::size_t j = 0; j < out.coords.size(); ++j) out.coords[j] += b.coords[j];
        parts.emplace_back(std::move(out));
        break;
      }
      case FactorKind::Cyclic: {
        const auto m = factors[i].param;
        const auto a = std::get<CyclicRes>(g.parts()[i]).r;
        const auto b = std::get<CyclicRes>(h.parts()[i]).r;
        parts.emplace_back(CyclicRes{(a + b) % m});
        break;
      }
    }
  }
  return GroupElement(g.spec(), std::move(parts));
}

inline GroupElement inverse(const GroupElement& g) {
  const auto& factors = g.spec().factors();
  std::vector<FactorElement> parts;
  parts.reserve(factors.size());
  for (std::size_t i = 0; i < factors.size(); ++i) {
    switch (factors[i].kind) {
      case FactorKind::Free: {
        const auto& a = std::get<FreeWord>(g.parts()[i]);
        FreeWord out;
        out.letters.reserve(a.letters.size());
        for (auto it = a.letters.rbegin(); it != a.letters.rend(); ++it) out.letters.push_back(-*it);
        parts.emplace_back(std::move(out));
        break;
      }
      case FactorKind::FreeAbelian: {
        const auto& a = std::get<AbelianVec>(g.parts()[i]);
        AbelianVec out = a;
        for (auto& c : out.coords) c = -c;
        parts.emplace_back(std::move(out));
        break;
      }
      case FactorKind::Cyclic: {
        const auto m = factors[i].param;
        const auto a = std::get<CyclicRes>(g.parts()[i]).r;
        parts.emplace_back(CyclicRes{a == 0 ? 0 : m - a});
        break;
      }
    }
  }
  return GroupElement(g.spec(), std::move(parts));
}

/// Word metric for the standard generating set: reduced length on free
/// factors, l1 norm on free-abelian factors, min(r, m-r) on cyclic ones,
/// summed over the direct product.
inline long word_length(const GroupElement& g) {
  const auto& factors = g.spec().factors();
  long total = 0;
  for (std::size_t i = 0; i < factors.size(); ++i) {
    switch (factors[i].kind) {
      case FactorKind::Free:
        total += static_cast<long>(std::get<FreeWord>(g.parts()[i]).letters.size());
        break;
      case FactorKind::FreeAbelian:
        for (auto c : std::get<AbelianVec>(g.parts()[i]).coords) total += static_cast<long>(c < 0 ? -c : c);
        break;
      case FactorKind::Cyclic: {
        const auto m = factors[i].param;
        const auto r = std::get<CyclicRes>(g.parts()[i]).r;
        total += static_cast<long>(std::min(r, m - r));
        break;
      }
    }
  }
  return total;
}

/// Standard generators together with their inverses (deduplicated, so a
/// C2 generator appears once).
inline std::vector<GroupElement> generators(const GroupSpec& spec) {
  std::vector<GroupElement> gens;
  const auto& factors = spec.factors();
  for (std::size_t i = 0; i < factors.size(); ++i) {
    const auto& f = factors[i];
    auto with_part = [&](FactorElement part) {
      auto e = identity(spec);
      std::vector<FactorElement> parts = e.parts();
      parts[i] = std::move(part);
      return GroupElement(spec, std::move(parts));
    };
    switch (f.kind) {
      case FactorKind::Free:
        for (std::int32_t k = 1; k <= f.param; ++k) {
          gens.push_back(with_part(FreeWord{{k}}));
          gens.push_back(with_part(FreeWord{{-k}}));
        }
        break;
      case FactorKind::FreeAbelian:
        for (long d = 0; d < f.param; ++d) {
          std::vector<std::int64_t> v(f.param, 0);
          v[d] = 1;
          gens.push_back(with_part(AbelianVec{v}));
          v[d] = -1;
          gens.push_back(with_part(AbelianVec{v}));
        }
        break;
      case FactorKind::Cyclic:
        if (f.param >= 2) {
          gens.push_back(with_part(CyclicRes{1}));
          if (f.param > 2) gens.push_back(with_part(CyclicRes{f.param - 1}));
        }
        break;
    }
  }
  return gens;
}

// ---- element tokens -------------------------------------------------------
//
// Free words use a..z for generators 1..26 and A..Z for their inverses,
// with "e" for the empty word. Abelian parts are integer tuples "(1,-2)",
// cyclic parts bare residues. Factors join with '|': "ab|(1,-2)|3".

inline std::string to_token(const GroupElement& g) {
  const auto& factors = g.spec().factors();
  std::string out;
  for (std::size_t i = 0; i < factors.size(); ++i) {
    if (i) out += '|';
    switch (factors[i].kind) {
      case FactorKind::Free: {
        const auto& w = std::get<FreeWord>(g.parts()[i]);
        if (w.letters.empty()) {
          out += 'e';
        } else {
          for (auto letter : w.letters) {
            out += static_cast<char>(letter > 0 ? ('a' + letter - 1) : ('A' - letter - 1));
          }
        }
        break;
      }
      case FactorKind::FreeAbelian: {
        const auto& v = std::get<AbelianVec>(g.parts()[i]);
        out += '(';
        for (std::size_t j = 0; j < v.coords.size(); ++j) {
          if (j) out += ',';
          out += std::to_string(v.coords[j]);
        }
        out += ')';
        break;
      }
      case FactorKind::Cyclic:
        out += std::to_string(std::get<CyclicRes>(g.parts()[i]).r);
        break;
    }
  }
  return out;
}

inline GroupElement parse_element(const GroupSpec& spec, std::string_view token);

// ---- deterministic ordering -----------------------------------------------

namespace detail {

inline std::strong_ordering compare_parts(const FactorElement& a, const FactorElement& b) {
  if (a.index() != b.index()) return a.index() <=> b.index();
  return std::visit(
      [&](const auto& lhs) {
        const auto& rhs = std::get<std::decay_t<decltype(lhs)>>(b);
        return lhs <=> rhs;
      },
      a);
}

}  // namespace detail

/// Shortlex order: word length first, then factorwise lexicographic
/// comparison of normal forms. Total, and stable across runs.
inline bool shortlex_less(const GroupElement& a, const GroupElement& b) {
  const long la = word_length(a);
  const long lb = word_length(b);
  if (la != lb) return la < lb;
  for (std::size_t i = 0; i < a.parts().size(); ++i) {
    const auto cmp = detail::compare_parts(a.parts()[i], b.parts()[i]);
    if (cmp != std::strong_ordering::equal) return cmp == std::strong_ordering::less;
  }
  return false;
}

// ---- balls ------------------------------------------------------------------

/// The word-metric ball B(e, radius), shortlex-ordered, with a token index.
struct Ball {
  GroupSpec spec;
  long radius = 0;
  std::vector<GroupElement> elements;
  std::unordered_map<std::string, std::size_t> index;

  std::size_t size() const { return elements.size(); }

  std::optional<std::size_t> find(const GroupElement& g) const {
    auto it = index.find(to_token(g));
    if (it == index.end()) return std::nullopt;
    return it->second;
  }

  bool contains(const GroupElement& g) const { return find(g).has_value(); }
};

inline Ball ball(const GroupSpec& spec, long radius, std::size_t cap = defaults::kBallCap) {
  if (radius < 0) throw input_error("ball radius must be >= 0");
  std::unordered_set<std::string> seen;
  std::vector<GroupElement> elements;
  std::deque<GroupElement> frontier;

  auto push = [&](GroupElement g) {
    auto token = to_token(g);
    if (!seen.insert(std::move(token)).second) return false;
    if (elements.size() + 1 > cap) {
      throw resource_error("ball size cap (" + std::to_string(cap) + " elements) exceeded for " +
                           spec.to_string() + " at radius " + std::to_string(radius));
    }
    elements.push_back(g);
    frontier.push_back(std::move(g));
    return true;
  };

  push(identity(spec));
  const auto gens = generators(spec);
  for (long level = 0; level < radius; ++level) {
    std::deque<GroupElement> next;
    while (!frontier.empty()) {
      auto g = std::move(frontier.front());
      frontier.pop_front();
      for (const auto& s : gens) {
        auto gs = multiply(g, s);
        auto token = to_token(gs);
        if (seen.contains(token)) continue;
        seen.insert(std::move(token));
        if (elements.size() + 1 > cap) {
          throw resource_error("ball size cap (" + std::to_string(cap) +
                               " elements) exceeded for " + spec.to_string() + " at radius " +
                               std::to_string(radius));
        }
        elements.push_back(gs);
        next.push_back(std::move(gs));
      }
    }
    frontier = std::move(next);
  }

  std::sort(elements.begin(), elements.end(), shortlex_less);
  Ball out{spec, radius, std::move(elements), {}};
  out.index.reserve(out.elements.size());
  for (std::size_t i = 0; i < out.elements.size(); ++i) {
    out.index.emplace(to_token(out.elements[i]), i);
  }
  return out;
}

/// Elements of exact word length r, in ball order.
inline std::vector<GroupElement> sphere(const Ball& b, long r) {
  std::vector<GroupElement> out;
  for (const auto& g : b.elements) {
    if (word_length(g) == r) out.push_back(g);
  }
  return out;
}

// ---- parsing ----------------------------------------------------------------

namespace detail {

inline long parse_positive_int(std::string_view s, std::string_view what) {
  long value = 0;
  const auto* begin = s.data();
  const auto* end = s.data() + s.size();
  auto [ptr, ec] = std::from_chars(begin, end, value);
  if (ec != std::errc{} || ptr != end || value < 1) {
    throw input_error("expected positive integer for " + std::string(what) + ", got '" +
                      std::string(s) + "'");
  }
  return value;
}

inline std::string_view trim(std::string_view s) {
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front()))) s.remove_prefix(1);
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) s.remove_suffix(1);
  return s;
}

}  // namespace detail

inline GroupSpec GroupSpec::parse(std::string_view text) {
  std::vector<Factor> factors;
  std::size_t start = 0;
  const std::string s(text);
  while (start <= s.size()) {
    auto stop = s.find('x', start);
    // 'x' only separates factors; it cannot occur inside F<k>/Z^<d>/C<m>.
    auto piece = detail::trim(std::string_view(s).substr(
        start, stop == std::string::npos ? std::string::npos : stop - start));
    if (piece.empty()) throw input_error("empty factor in group spec '" + s + "'");
    if (piece == "Z") {
      factors.push_back({FactorKind::FreeAbelian, 1});
    } else if (piece.starts_with("Z^")) {
      factors.push_back({FactorKind::FreeAbelian, detail::parse_positive_int(piece.substr(2), "Z^ rank")});
    } else if (piece.starts_with("F")) {
      const long k = detail::parse_positive_int(piece.substr(1), "free rank");
      if (k > 26) throw input_error("free rank above 26 not supported by the a..z token alphabet");
      factors.push_back({FactorKind::Free, k});
    } else if (piece.starts_with("C")) {
      factors.push_back({FactorKind::Cyclic, detail::parse_positive_int(piece.substr(1), "cyclic order")});
    } else {
      throw input_error("unrecognized factor '" + std::string(piece) + "' in group spec '" + s + "'");
    }
    if (stop == std::string::npos) break;
    start = stop + 1;
  }
  return GroupSpec(std::move(factors));
}

inline GroupElement parse_element(const GroupSpec& spec, std::string_view token) {
  const auto& factors = spec.factors();
  std::vector<std::string_view> pieces;
  std::size_t start = 0;
  while (true) {
    auto stop = token.find('|', start);
    pieces.push_back(token.substr(start, stop == std::string_view::npos ? std::string_view::npos
                                                                        : stop - start));
    if (stop == std::string_view::npos) break;
    start = stop + 1;
  }
  if (pieces.size() != factors.size()) {
    throw input_error("element token '" + std::string(token) + "' has " +
                      std::to_string(pieces.size()) + " parts, expected " +
                      std::to_string(factors.size()) + " for " + spec.to_string());
  }
  std::vector<FactorElement> parts;
  parts.reserve(factors.size());
  for (std::size_t i = 0; i < factors.size(); ++i) {
    auto piece = detail::trim(pieces[i]);
    switch (factors[i].kind) {
      case FactorKind::Free: {
        FreeWord w;
        if (piece != "e" && piece != "1") {
          for (char c : piece) {
            std::int32_t letter = 0;
            if (c >= 'a' && c <= 'z') letter = c - 'a' + 1;
            else if (c >= 'A' && c <= 'Z') letter = -(c - 'A' + 1);
            else throw input_error("bad free-word letter '" + std::string(1, c) + "' in token");
            if (std::abs(letter) > factors[i].param) {
              throw input_error("letter '" + std::string(1, c) + "' exceeds free rank " +
                                std::to_string(factors[i].param));
            }
            detail::append_reduced(w.letters, letter);
          }
        }
        parts.emplace_back(std::move(w));
        break;
      }
      case FactorKind::FreeAbelian: {
        if (piece.size() < 2 || piece.front() != '(' || piece.back() != ')') {
          throw input_error("abelian part must look like (1,-2), got '" + std::string(piece) + "'");
        }
        auto inner = piece.substr(1, piece.size() - 2);
        AbelianVec v;
        std::size_t p = 0;
        while (p <= inner.size()) {
          auto q = inner.find(',', p);
          auto item = detail::trim(inner.substr(p, q == std::string_view::npos ? std::string_view::npos : q - p));
          std::int64_t value = 0;
          auto [ptr, ec] = std::from_chars(item.data(), item.data() + item.size(), value);
          if (ec != std::errc{} || ptr != item.data() + item.size()) {
            throw input_error("bad integer '" + std::string(item) + "' in abelian part");
          }
          v.coords.push_back(value);
          if (q == std::string_view::npos) break;
          p = q + 1;
        }
        if (static_cast<long>(v.coords.size()) != factors[i].param) {
          throw input_error("abelian part has " + std::to_string(v.coords.size()) +
                            " coordinates, expected " + std::to_string(factors[i].param));
        }
        parts.emplace_back(std::move(v));
        break;
      }
      case FactorKind::Cyclic: {
        std::int64_t value = 0;
        auto [ptr, ec] = std::from_chars(piece.data(), piece.data() + piece.size(), value);
        if (ec != std::errc{} || ptr != piece.data() + piece.size()) {
          throw input_error("bad cyclic residue '" + std::string(piece) + "'");
        }
        const auto m = factors[i].param;
        value %= m;
        if (value < 0) value += m;
        parts.emplace_back(CyclicRes{value});
        break;
      }
    }
  }
  return GroupElement(spec, std::move(parts));
}

}  // namespace atmen::groups
