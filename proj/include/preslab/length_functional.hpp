#pragma once

// Length functionals on conjugacy classes: word length, log spectral
// radius of a representation, hyperbolic translation length, and scalar
// multiples thereof.

#include <functional>
#include <memory>
#include <string>

#include "representation.hpp"
#include "word.hpp"

namespace preslab {

class LengthFunctional {
 public:
  enum class Kind { WordLength, LogSpectralRadius, TranslationLength, Scaled };

  static LengthFunctional word_length() {
    return LengthFunctional(Kind::WordLength, "word-length",
                            [](const ConjClass& c) { return static_cast<double>(c.length); });
  }

  static LengthFunctional log_spectral_radius(Representation rep) {
    auto shared = std::make_shared<Representation>(std::move(rep));
    return LengthFunctional(
        Kind::LogSpectralRadius, "logLambda[" + shared->label() + "]",
        [shared](const ConjClass& c) { return spectral_data(*shared, c.rep).log_radius; });
  }

  static LengthFunctional hyperbolic_length(ComplexRep rep) {
    auto shared = std::make_shared<ComplexRep>(std::move(rep));
    return LengthFunctional(
        Kind::TranslationLength, "translation[" + shared->label() + "]",
        [shared](const ConjClass& c) { return translation_length(*shared, c.rep); });
  }

  static LengthFunctional scaled(double c, const LengthFunctional& f) {
    auto inner = f.eval_;
    return LengthFunctional(Kind::Scaled, std::to_string(c) + "*" + f.name_,
                            [c, inner](const ConjClass& cc) { return c * inner(cc); });
  }

  double operator()(const ConjClass& c) const { return eval_(c); }
  Kind kind() const { return kind_; }
  const std::string& name() const { return name_; }

 private:
  LengthFunctional(Kind k, std::string name, std::function<double(const ConjClass&)> f)
      : kind_(k), name_(std::move(name)), eval_(std::move(f)) {}

  Kind kind_;
  std::string name_;
  std::function<double(const ConjClass&)> eval_;
};

}  // namespace preslab
