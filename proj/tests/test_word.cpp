#include <catch2/catch_amalgamated.hpp>
#include <map>
#include <set>

#include "preslab/word.hpp"

using namespace preslab;

namespace {

// Independent brute-force oracle: generate every reduced word of length n
// by direct recursion, filter cyclically reduced ones, and dedup classes
// by the set of all rotations.
void all_reduced_words(int rank, int n, std::vector<Letter>& cur,
                       std::vector<std::vector<Letter>>& out) {
  if (static_cast<int>(cur.size()) == n) {
    out.push_back(cur);
    return;
  }
  for (Letter l = 0; l < static_cast<Letter>(2 * rank); ++l) {
    if (!cur.empty() && cur.back() == inverse_letter(l)) continue;
    cur.push_back(l);
    all_reduced_words(rank, n, cur, out);
    cur.pop_back();
  }
}

struct OracleCounts {
  std::size_t cyc_words = 0;
  std::size_t classes = 0;
};

OracleCounts oracle_counts(int rank, int n) {
  std::vector<std::vector<Letter>> words;
  std::vector<Letter> cur;
  all_reduced_words(rank, n, cur, words);
  OracleCounts c;
  std::set<std::vector<Letter>> seen;
  for (const auto& w : words) {
    if (n > 1 && w.back() == inverse_letter(w.front())) continue;
    ++c.cyc_words;
    // canonical form = least rotation, computed independently
    std::vector<Letter> best = w;
    for (std::size_t s = 1; s < w.size(); ++s) {
      std::vector<Letter> rot;
      for (std::size_t i = 0; i < w.size(); ++i) rot.push_back(w[(s + i) % w.size()]);
      best = std::min(best, rot);
    }
    seen.insert(best);
  }
  c.classes = seen.size();
  return c;
}

}  // namespace

TEST_CASE("reduce cancels adjacent inverses") {
  CHECK(reduce({0, 1, 2}) == Word::parse("b"));
  CHECK(reduce({}) == Word::identity());
  CHECK(reduce({0, 2, 3, 0}) == Word::parse("aa"));
}

TEST_CASE("group operations") {
  CHECK(multiply(Word::parse("a"), Word::parse("A")) == Word::identity());
  CHECK(invert(Word::parse("ab")) == Word::parse("BA"));
  CHECK(power(Word::parse("ab"), 2) == Word::parse("abab"));
  CHECK(power(Word::parse("ab"), 0) == Word::identity());
  CHECK(power(Word::parse("ab"), -1) == Word::parse("BA"));
}

TEST_CASE("reduce idempotent, inverse law (property)") {
  for (std::uint64_t seed = 1; seed <= 50; ++seed) {
    Word w = random_word(seed, 1 + static_cast<int>(seed % 20));
    CHECK(reduce(w.letters()) == w);
    CHECK(multiply(w, invert(w)) == Word::identity());
  }
}

TEST_CASE("class representatives") {
  auto c1 = class_representative(Word::parse("abA"));
  CHECK(c1.rep == Word::parse("b"));
  CHECK(c1.length == 1);
  CHECK(c1.primitive);

  auto c2 = class_representative(Word::parse("abab"));
  CHECK(c2.rep == Word::parse("abab"));
  CHECK_FALSE(c2.primitive);
  CHECK(c2.root == Word::parse("ab"));
  CHECK(c2.root_power == 2);

  CHECK(class_representative(Word::parse("ba")).rep == Word::parse("ab"));
  CHECK_THROWS_AS(class_representative(Word::parse("aA")), IdentityWord);
}

TEST_CASE("class representative is conjugation invariant (property)") {
  for (std::uint64_t seed = 1; seed <= 40; ++seed) {
    Word x = random_word(seed, 1 + static_cast<int>(seed % 8));
    Word g = random_word(seed + 1000, 1 + static_cast<int>((seed * 7) % 10));
    Word conj = multiply(multiply(g, x), invert(g));
    if (cyclic_reduce(conj).empty()) continue;
    CHECK(class_representative(conj).rep == class_representative(x).rep);
  }
}

TEST_CASE("enumerate_classes at rank 2, small lengths") {
  auto cls = enumerate_classes(2, 1);
  REQUIRE(cls.size() == 4);
  CHECK(cls[0].rep == Word::parse("a"));
  CHECK(cls[1].rep == Word::parse("A"));
  CHECK(cls[2].rep == Word::parse("b"));
  CHECK(cls[3].rep == Word::parse("B"));
}

TEST_CASE("enumerate_classes matches brute-force oracle up to length 8") {
  auto cls = enumerate_classes(2, 8);
  std::map<std::size_t, std::size_t> by_len;
  for (const auto& c : cls) ++by_len[c.length];
  // no duplicates
  std::set<std::vector<Letter>> reps;
  for (const auto& c : cls) reps.insert(c.rep.letters());
  CHECK(reps.size() == cls.size());
  for (int n = 1; n <= 8; ++n) {
    auto oc = oracle_counts(2, n);
    INFO("length " << n);
    CHECK(by_len[static_cast<std::size_t>(n)] == oc.classes);
    // closed form for cyclically reduced words at rank 2
    std::size_t closed =
        static_cast<std::size_t>(std::llround(std::pow(3.0, n) + 2 + (n % 2 ? -1 : 1)));
    CHECK(oc.cyc_words == closed);
  }
}

TEST_CASE("28 cyclically reduced words of length 3 at rank 2") {
  CHECK(oracle_counts(2, 3).cyc_words == 28);
}

TEST_CASE("enumeration budget") {
  CHECK_THROWS_AS(enumerate_classes(2, 30, 1000), ResourceLimit);
  CHECK_THROWS_AS(enumerate_classes(1, 3), UnsupportedGroup);
}

TEST_CASE("coprimality") {
  CHECK(are_coprime(Word::parse("a"), Word::parse("b")));
  CHECK_FALSE(are_coprime(Word::parse("ab"), Word::parse("abab")));
  CHECK_FALSE(are_coprime(Word::parse("a"), Word::parse("A")));
  CHECK_THROWS_AS(are_coprime(Word::parse("aA"), Word::parse("b")), IdentityWord);
  for (std::uint64_t seed = 1; seed <= 30; ++seed) {
    Word x = random_word(seed, 1 + static_cast<int>(seed % 6));
    Word y = random_word(seed + 99, 1 + static_cast<int>((seed * 3) % 6));
    if (cyclic_reduce(x).empty() || cyclic_reduce(y).empty()) continue;
    bool c = are_coprime(x, y);
    CHECK(are_coprime(y, x) == c);
    CHECK(are_coprime(invert(x), y) == c);
  }
}

TEST_CASE("random_word determinism") {
  Word w1 = random_word(1, 3);
  Word w2 = random_word(1, 3);
  CHECK(w1 == w2);
  CHECK(w1.size() == 3);
  CHECK(reduce(w1.letters()) == w1);
  CHECK_THROWS_AS(random_word(2, 0), ConfigError);
}
