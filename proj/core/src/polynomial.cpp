#include "invertlab/polynomial.hpp"

#include "invertlab/common.hpp"

#include <boost/math/special_functions/binomial.hpp>

#include <numeric>

namespace invertlab {

namespace {

template <typename Scalar>
bool is_zero_coefficient(const Scalar& c) {
  return c == Scalar{};
}

}  // namespace

template <typename Scalar>
SparsePolynomial<Scalar>::SparsePolynomial(int num_vars, const std::vector<Term>& terms)
    : num_vars_(num_vars) {
  std::map<Exponents, Scalar> acc;
  for (const auto& t : terms) {
    if (static_cast<int>(t.exponents.size()) != num_vars) {
      throw PreconditionError("monomial has " + std::to_string(t.exponents.size()) +
                              " exponents, expected " + std::to_string(num_vars));
    }
    for (int e : t.exponents) {
      if (e < 0) throw PreconditionError("negative exponent in monomial");
    }
    add_term(t.exponents, t.coefficient, acc);
  }
  assign(acc);
}

template <typename Scalar>
SparsePolynomial<Scalar> SparsePolynomial<Scalar>::constant(int num_vars, Scalar c) {
  return SparsePolynomial(num_vars, {Term{Exponents(num_vars, 0), c}});
}

template <typename Scalar>
SparsePolynomial<Scalar> SparsePolynomial<Scalar>::variable(int num_vars, int var) {
  Exponents e(num_vars, 0);
  e.at(var) = 1;
  return SparsePolynomial(num_vars, {Term{e, Scalar{1}}});
}

template <typename Scalar>
int SparsePolynomial<Scalar>::degree() const {
  int d = -1;
  for (const auto& t : terms_) {
    d = std::max(d, std::accumulate(t.exponents.begin(), t.exponents.end(), 0));
  }
  return d;
}

template <typename Scalar>
bool SparsePolynomial<Scalar>::is_homogeneous(int k) const {
  for (const auto& t : terms_) {
    if (std::accumulate(t.exponents.begin(), t.exponents.end(), 0) != k) return false;
  }
  return true;
}

template <typename Scalar>
SparsePolynomial<Scalar> SparsePolynomial<Scalar>::derivative(int var) const {
  std::map<Exponents, Scalar> acc;
  for (const auto& t : terms_) {
    const int e = t.exponents[var];
    if (e == 0) continue;
    Exponents d = t.exponents;
    d[var] = e - 1;
    add_term(d, t.coefficient * Scalar(static_cast<double>(e)), acc);
  }
  SparsePolynomial out(num_vars_);
  out.assign(acc);
  return out;
}

template <typename Scalar>
SparsePolynomial<Scalar> SparsePolynomial<Scalar>::operator+(const SparsePolynomial& other) const {
  std::map<Exponents, Scalar> acc;
  for (const auto& t : terms_) add_term(t.exponents, t.coefficient, acc);
  for (const auto& t : other.terms_) add_term(t.exponents, t.coefficient, acc);
  SparsePolynomial out(std::max(num_vars_, other.num_vars_));
  out.assign(acc);
  return out;
}

template <typename Scalar>
SparsePolynomial<Scalar> SparsePolynomial<Scalar>::operator-(const SparsePolynomial& other) const {
  return *this + other * Scalar(-1.0);
}

template <typename Scalar>
SparsePolynomial<Scalar> SparsePolynomial<Scalar>::operator*(const SparsePolynomial& other) const {
  if (num_vars_ != other.num_vars_) throw PreconditionError("polynomial variable count mismatch");
  std::map<Exponents, Scalar> acc;
  for (const auto& a : terms_) {
    for (const auto& b : other.terms_) {
      Exponents e(num_vars_);
      for (int v = 0; v < num_vars_; ++v) e[v] = a.exponents[v] + b.exponents[v];
      add_term(e, a.coefficient * b.coefficient, acc);
    }
  }
  SparsePolynomial out(num_vars_);
  out.assign(acc);
  return out;
}

template <typename Scalar>
SparsePolynomial<Scalar> SparsePolynomial<Scalar>::operator*(Scalar s) const {
  std::map<Exponents, Scalar> acc;
  for (const auto& t : terms_) add_term(t.exponents, t.coefficient * s, acc);
  SparsePolynomial out(num_vars_);
  out.assign(acc);
  return out;
}

template <typename Scalar>
Scalar SparsePolynomial<Scalar>::coefficient(const Exponents& e) const {
  for (const auto& t : terms_) {
    if (t.exponents == e) return t.coefficient;
  }
  return Scalar{};
}

template <typename Scalar>
void SparsePolynomial<Scalar>::add_term(const Exponents& e, Scalar c,
                                        std::map<Exponents, Scalar>& acc) const {
  acc[e] += c;
}

template <typename Scalar>
void SparsePolynomial<Scalar>::assign(const std::map<Exponents, Scalar>& acc) {
  terms_.clear();
  for (const auto& [e, c] : acc) {
    if (!is_zero_coefficient(c)) terms_.push_back(Term{e, c});
  }
}

template class SparsePolynomial<double>;
template class SparsePolynomial<std::complex<double>>;

RealifiedPolynomial realify(const ComplexPolynomial& p) {
  const int n = p.num_vars();
  const int m = 2 * n;
  using C = std::complex<double>;

  // Expand every monomial c * prod_j (x_j + i y_j)^{e_j} over the real
  // variables; the result has complex coefficients on real monomials, so its
  // real and imaginary parts are read off coefficient-wise.
  std::vector<ComplexPolynomial::Term> expanded;
  for (const auto& t : p.terms()) {
    ComplexPolynomial acc = ComplexPolynomial::constant(m, t.coefficient);
    for (int j = 0; j < n; ++j) {
      const int e = t.exponents[j];
      if (e == 0) continue;
      std::vector<ComplexPolynomial::Term> binom_terms;
      C i_power{1.0, 0.0};
      for (int k = 0; k <= e; ++k) {
        Exponents ex(m, 0);
        ex[2 * j] = e - k;
        ex[2 * j + 1] = k;
        const double b = boost::math::binomial_coefficient<double>(
            static_cast<unsigned>(e), static_cast<unsigned>(k));
        binom_terms.push_back({ex, b * i_power});
        i_power *= C{0.0, 1.0};
      }
      acc = acc * ComplexPolynomial(m, binom_terms);
    }
    for (const auto& u : acc.terms()) expanded.push_back(u);
  }
  const ComplexPolynomial full(m, expanded);

  std::vector<RealPolynomial::Term> re;
  std::vector<RealPolynomial::Term> im;
  for (const auto& t : full.terms()) {
    if (t.coefficient.real() != 0.0) re.push_back({t.exponents, t.coefficient.real()});
    if (t.coefficient.imag() != 0.0) im.push_back({t.exponents, t.coefficient.imag()});
  }
  return {RealPolynomial(m, re), RealPolynomial(m, im)};
}

}  // namespace invertlab
