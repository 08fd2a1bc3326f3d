#pragma once

#include <complex>
#include <map>
#include <span>
#include <string>
#include <vector>

namespace invertlab {

using Exponents = std::vector<int>;

/// Sparse multivariate polynomial with a fixed number of variables.
///
/// Terms are kept in canonical form: exponent tuples are unique, sorted
/// lexicographically, and zero coefficients are dropped.
template <typename Scalar>
class SparsePolynomial {
 public:
  struct Term {
    Exponents exponents;
    Scalar coefficient;
  };

  SparsePolynomial() = default;
  explicit SparsePolynomial(int num_vars) : num_vars_(num_vars) {}
  SparsePolynomial(int num_vars, const std::vector<Term>& terms);

  static SparsePolynomial constant(int num_vars, Scalar c);
  /// The polynomial x_var.
  static SparsePolynomial variable(int num_vars, int var);

  int num_vars() const { return num_vars_; }
  const std::vector<Term>& terms() const { return terms_; }
  bool is_zero() const { return terms_.empty(); }
  /// Largest total degree of any term; -1 for the zero polynomial.
  int degree() const;
  /// True when every term has total degree exactly `k` (the zero
  /// polynomial is homogeneous of every degree).
  bool is_homogeneous(int k) const;

  template <typename Arg>
  auto evaluate(std::span<const Arg> x) const;

  SparsePolynomial derivative(int var) const;

  SparsePolynomial operator+(const SparsePolynomial& other) const;
  SparsePolynomial operator-(const SparsePolynomial& other) const;
  SparsePolynomial operator*(const SparsePolynomial& other) const;
  SparsePolynomial operator*(Scalar s) const;

  /// Coefficient of the given monomial, zero if absent.
  Scalar coefficient(const Exponents& e) const;

 private:
  void add_term(const Exponents& e, Scalar c, std::map<Exponents, Scalar>& acc) const;
  void assign(const std::map<Exponents, Scalar>& acc);

  int num_vars_ = 0;
  std::vector<Term> terms_;
};

using RealPolynomial = SparsePolynomial<double>;
using ComplexPolynomial = SparsePolynomial<std::complex<double>>;

/// Real and imaginary parts of a polynomial over 2n real variables
/// (x_1, y_1, ..., x_n, y_n) obtained by substituting z_j = x_j + i y_j.
struct RealifiedPolynomial {
  RealPolynomial real;
  RealPolynomial imag;
};
RealifiedPolynomial realify(const ComplexPolynomial& p);

template <typename Scalar>
template <typename Arg>
auto SparsePolynomial<Scalar>::evaluate(std::span<const Arg> x) const {
  using Result = decltype(Scalar{} * Arg{});
  Result sum{};
  for (const auto& t : terms_) {
    Result m = t.coefficient;
    for (int v = 0; v < num_vars_; ++v) {
      for (int e = 0; e < t.exponents[v]; ++e) m *= x[v];
    }
    sum += m;
  }
  return sum;
}

}  // namespace invertlab
