#pragma once

// Free group combinatorics: reduced words, conjugacy classes, enumeration.
//
// Letters are encoded as small integers over a rank-k free group:
//   generator i   -> 2*i
//   inverse of i  -> 2*i + 1
// so that the letter order a < a^-1 < b < b^-1 < ... is the natural
// integer order, and inversion is `letter ^ 1`.

#include <algorithm>
#include <cstdint>
#include <random>
#include <string>
#include <vector>

#include "errors.hpp"

namespace preslab {

using Letter = std::int8_t;

inline Letter inverse_letter(Letter l) { return static_cast<Letter>(l ^ 1); }

class Word {
 public:
  Word() = default;
  explicit Word(std::vector<Letter> reduced) : letters_(std::move(reduced)) {}

  static Word identity() { return Word{}; }

  const std::vector<Letter>& letters() const { return letters_; }
  std::size_t size() const { return letters_.size(); }
  bool empty() const { return letters_.empty(); }
  Letter front() const { return letters_.front(); }
  Letter back() const { return letters_.back(); }
  Letter operator[](std::size_t i) const { return letters_[i]; }

  bool operator==(const Word& o) const = default;
  auto operator<=>(const Word& o) const = default;

  // "abA" style: a..z generators, A..Z their inverses.
  static Word parse(const std::string& s);
  std::string str() const;

 private:
  std::vector<Letter> letters_;
};

// Free reduction of an arbitrary letter sequence.
inline Word reduce(const std::vector<Letter>& raw) {
  std::vector<Letter> out;
  out.reserve(raw.size());
  for (Letter l : raw) {
    if (!out.empty() && out.back() == inverse_letter(l))
      out.pop_back();
    else
      out.push_back(l);
  }
  return Word{std::move(out)};
}

inline Word multiply(const Word& x, const Word& y) {
  std::vector<Letter> raw = x.letters();
  raw.insert(raw.end(), y.letters().begin(), y.letters().end());
  return reduce(raw);
}

inline Word invert(const Word& x) {
  std::vector<Letter> out(x.letters().rbegin(), x.letters().rend());
  for (Letter& l : out) l = inverse_letter(l);
  return Word{std::move(out)};
}

inline Word power(const Word& x, long n) {
  if (n == 0) return Word::identity();
  Word base = n > 0 ? x : invert(x);
  long k = n > 0 ? n : -n;
  Word acc;
  for (long i = 0; i < k; ++i) acc = multiply(acc, base);
  return acc;
}

inline Word Word::parse(const std::string& s) {
  std::vector<Letter> raw;
  raw.reserve(s.size());
  for (char c : s) {
    if (c >= 'a' && c <= 'z')
      raw.push_back(static_cast<Letter>(2 * (c - 'a')));
    else if (c >= 'A' && c <= 'Z')
      raw.push_back(static_cast<Letter>(2 * (c - 'A') + 1));
    else if (c == ' ')
      continue;
    else
      throw ConfigError("Word::parse: bad character '" + std::string(1, c) + "'");
  }
  return reduce(raw);
}

inline std::string Word::str() const {
  if (letters_.empty()) return "1";
  std::string s;
  for (Letter l : letters_) {
    char base = (l & 1) ? 'A' : 'a';
    s.push_back(static_cast<char>(base + l / 2));
  }
  return s;
}

// Cyclic reduction: strip conjugating pairs from the ends.
inline Word cyclic_reduce(const Word& w) {
  std::vector<Letter> v = w.letters();
  std::size_t lo = 0, hi = v.size();
  while (hi - lo >= 2 && v[lo] == inverse_letter(v[hi - 1])) {
    ++lo;
    --hi;
  }
  return Word{std::vector<Letter>(v.begin() + lo, v.begin() + hi)};
}

// Lexicographically least rotation (Booth-style linear scan is overkill
// at these lengths; quadratic scan keeps it obvious).
inline Word min_rotation(const Word& w) {
  const auto& v = w.letters();
  const std::size_t n = v.size();
  if (n <= 1) return w;
  std::size_t best = 0;
  for (std::size_t s = 1; s < n; ++s) {
    for (std::size_t i = 0; i < n; ++i) {
      Letter a = v[(s + i) % n];
      Letter b = v[(best + i) % n];
      if (a != b) {
        if (a < b) best = s;
        break;
      }
    }
  }
  std::vector<Letter> out(n);
  for (std::size_t i = 0; i < n; ++i) out[i] = v[(best + i) % n];
  return Word{std::move(out)};
}

struct ConjClass {
  Word rep;        // cyclically reduced, minimal rotation
  std::size_t length = 0;  // translation length l(gamma)
  bool primitive = true;
  Word root;       // primitive root u with rep = u^p
  int root_power = 1;

  bool operator==(const ConjClass& o) const { return rep == o.rep; }
};

inline ConjClass class_representative(const Word& x) {
  Word c = cyclic_reduce(x);
  if (c.empty()) throw IdentityWord("class_representative: identity word");
  Word r = min_rotation(c);
  ConjClass cc;
  cc.rep = r;
  cc.length = r.size();
  const std::size_t n = r.size();
  // smallest period d dividing n with rotation-by-d invariance
  for (std::size_t d = 1; d <= n; ++d) {
    if (n % d != 0) continue;
    bool periodic = true;
    for (std::size_t i = 0; i < n && periodic; ++i)
      periodic = r[i] == r[(i + d) % n];
    if (periodic) {
      cc.root = Word{std::vector<Letter>(r.letters().begin(), r.letters().begin() + d)};
      cc.root_power = static_cast<int>(n / d);
      break;
    }
  }
  cc.primitive = cc.root_power == 1;
  return cc;
}

// All conjugacy classes of translation length <= max_len, each exactly
// once, ordered by (length, lexicographic representative).
//
// A cyclically reduced word is emitted iff it equals its own minimal
// rotation, so no dedup storage is needed.
inline std::vector<ConjClass> enumerate_classes(int rank, int max_len,
                                                std::uint64_t node_budget = 500'000'000) {
  if (rank < 2) throw UnsupportedGroup("enumerate_classes: rank must be >= 2");
  if (max_len < 1) throw ConfigError("enumerate_classes: max_len must be >= 1");
  {
    // worst-case visited nodes: 2k (2k-1)^(L-1)
    long double est = 2.0L * rank;
    for (int i = 1; i < max_len; ++i) est *= 2.0L * rank - 1.0L;
    if (est > static_cast<long double>(node_budget))
      throw ResourceLimit("enumerate_classes: state count exceeds budget");
  }
  const Letter nlet = static_cast<Letter>(2 * rank);
  std::vector<ConjClass> out;
  std::vector<Letter> w;
  for (int n = 1; n <= max_len; ++n) {
    w.assign(static_cast<std::size_t>(n), 0);
    // DFS over reduced words of length n
    auto emit = [&]() {
      // cyclically reduced?
      if (n > 1 && w.back() == inverse_letter(w.front())) return;
      // canonical (equal to minimal rotation)?
      Word cand{w};
      if (min_rotation(cand) != cand) return;
      out.push_back(class_representative(cand));
    };
    std::vector<Letter> stack;
    stack.reserve(static_cast<std::size_t>(n));
    // iterative DFS with explicit letter counters
    std::vector<Letter> next(static_cast<std::size_t>(n), 0);
    int depth = 0;
    while (depth >= 0) {
      if (depth == n) {
        emit();
        --depth;
        continue;
      }
      Letter l = next[static_cast<std::size_t>(depth)];
      if (l >= nlet) {
        next[static_cast<std::size_t>(depth)] = 0;
        --depth;
        continue;
      }
      next[static_cast<std::size_t>(depth)] = static_cast<Letter>(l + 1);
      if (depth > 0 && w[static_cast<std::size_t>(depth - 1)] == inverse_letter(l)) continue;
      w[static_cast<std::size_t>(depth)] = l;
      ++depth;
      if (depth < n) next[static_cast<std::size_t>(depth)] = 0;
    }
  }
  return out;
}

inline bool are_coprime(const Word& x, const Word& y) {
  if (cyclic_reduce(x).empty() || cyclic_reduce(y).empty())
    throw IdentityWord("are_coprime: identity word");
  return multiply(x, y) != multiply(y, x);
}

inline Word random_word(std::uint64_t seed, int length, int rank = 2) {
  if (length < 1) throw ConfigError("random_word: length must be >= 1");
  if (rank < 2) throw UnsupportedGroup("random_word: rank must be >= 2");
  std::mt19937_64 rng(seed);
  std::vector<Letter> v;
  v.reserve(static_cast<std::size_t>(length));
  std::uniform_int_distribution<int> first(0, 2 * rank - 1);
  v.push_back(static_cast<Letter>(first(rng)));
  std::uniform_int_distribution<int> next(0, 2 * rank - 2);
  for (int i = 1; i < length; ++i) {
    int r = next(rng);
    Letter forbidden = inverse_letter(v.back());
    // skip the forbidden letter in order
    Letter l = static_cast<Letter>(r >= forbidden ? r + 1 : r);
    v.push_back(l);
  }
  return Word{std::move(v)};
}

}  // namespace preslab
