#include "bergext/polynomial.hpp"

#include <cctype>
#include <cmath>
#include <cstdlib>
#include <sstream>

namespace bergext {

namespace {

constexpr double kDropTol = 0.0;  // exact cancellation only

}  // namespace

void Poly::add_term(const Exponents& e, Complex c) {
  if (c == Complex{}) return;
  auto [it, inserted] = terms_.try_emplace(e, c);
  if (!inserted) {
    it->second += c;
    if (std::abs(it->second) <= kDropTol) terms_.erase(it);
  }
}

Poly Poly::constant(Complex c, Kind kind) {
  Poly p(kind);
  p.add_term({0, 0, 0, 0}, c);
  return p;
}

Poly Poly::variable(int index, Kind kind) {
  const int limit = kind == Kind::holomorphic ? 2 : 4;
  if (index < 0 || index >= limit) throw ParameterError("Poly::variable: index out of range");
  Poly p(kind);
  Exponents e{0, 0, 0, 0};
  e[static_cast<std::size_t>(index)] = 1;
  p.add_term(e, 1.0);
  return p;
}

Poly Poly::univariate(const std::vector<Complex>& coeffs, int var) {
  Poly p(Kind::holomorphic);
  for (std::size_t n = 0; n < coeffs.size(); ++n) {
    Exponents e{0, 0, 0, 0};
    e[static_cast<std::size_t>(var)] = static_cast<int>(n);
    p.add_term(e, coeffs[n]);
  }
  return p;
}

int Poly::degree() const {
  int d = 0;
  for (const auto& [e, c] : terms_) d = std::max(d, e[0] + e[1] + e[2] + e[3]);
  return d;
}

int Poly::degree_in(int var) const {
  int d = 0;
  for (const auto& [e, c] : terms_) d = std::max(d, e[static_cast<std::size_t>(var)]);
  return d;
}

bool Poly::depends_only_on(int var) const {
  for (const auto& [e, c] : terms_)
    for (int k = 0; k < 4; ++k)
      if (k != var && e[static_cast<std::size_t>(k)] != 0) return false;
  return true;
}

bool Poly::uses_second_factor() const {
  const int first_second = kind_ == Kind::holomorphic ? 1 : 2;
  for (const auto& [e, c] : terms_)
    for (int k = first_second; k < 4; ++k)
      if (e[static_cast<std::size_t>(k)] != 0) return true;
  return false;
}

Complex Poly::operator()(const Point& p) const {
  std::array<Complex, 4> v{};
  if (kind_ == Kind::holomorphic) {
    v = {p[0], p[1], Complex{1.0}, Complex{1.0}};
  } else {
    v = {Complex{p[0].real()}, Complex{p[0].imag()}, Complex{p[1].real()}, Complex{p[1].imag()}};
  }
  Complex sum{0.0, 0.0};
  for (const auto& [e, c] : terms_) {
    Complex term = c;
    for (std::size_t k = 0; k < 4; ++k)
      for (int j = 0; j < e[k]; ++j) term *= v[k];
    sum += term;
  }
  return sum;
}

Poly Poly::derivative(int var) const {
  Poly out(kind_);
  const auto k = static_cast<std::size_t>(var);
  for (const auto& [e, c] : terms_) {
    if (e[k] == 0) continue;
    Exponents d = e;
    d[k] -= 1;
    out.add_term(d, c * static_cast<double>(e[k]));
  }
  return out;
}

Poly Poly::laplacian(int factor) const {
  if (kind_ != Kind::real) throw ParameterError("Poly::laplacian: defined for real polynomials only");
  const int x = 2 * factor;
  return derivative(x).derivative(x) + derivative(x + 1).derivative(x + 1);
}

Poly Poly::restrict_zero(int var) const {
  Poly out(kind_);
  for (const auto& [e, c] : terms_)
    if (e[static_cast<std::size_t>(var)] == 0) out.add_term(e, c);
  return out;
}

Poly Poly::divide_by_variable(int var, double tol) const {
  Poly out(kind_);
  const auto k = static_cast<std::size_t>(var);
  for (const auto& [e, c] : terms_) {
    if (e[k] == 0) {
      if (std::abs(c) > tol) {
        std::ostringstream os;
        os << "divide_by_variable: remainder " << std::abs(c) << " exceeds tolerance " << tol;
        throw DivergenceError(os.str());
      }
      continue;
    }
    Exponents d = e;
    d[k] -= 1;
    out.add_term(d, c);
  }
  return out;
}

std::vector<Complex> Poly::univariate_coeffs(int var) const {
  if (!depends_only_on(var)) throw ParameterError("Poly::univariate_coeffs: polynomial is not univariate");
  std::vector<Complex> out(static_cast<std::size_t>(degree_in(var)) + 1, Complex{});
  for (const auto& [e, c] : terms_) out[static_cast<std::size_t>(e[static_cast<std::size_t>(var)])] += c;
  return out;
}

Poly& Poly::operator+=(const Poly& o) {
  for (const auto& [e, c] : o.terms_) add_term(e, c);
  return *this;
}

Poly& Poly::operator-=(const Poly& o) {
  for (const auto& [e, c] : o.terms_) add_term(e, -c);
  return *this;
}

Poly& Poly::operator*=(Complex s) {
  if (s == Complex{}) {
    terms_.clear();
    return *this;
  }
  for (auto& [e, c] : terms_) c *= s;
  return *this;
}

Poly operator*(const Poly& a, const Poly& b) {
  Poly out(a.kind_);
  for (const auto& [ea, ca] : a.terms_)
    for (const auto& [eb, cb] : b.terms_) {
      Poly::Exponents e{};
      for (std::size_t k = 0; k < 4; ++k) e[k] = ea[k] + eb[k];
      out.add_term(e, ca * cb);
    }
  return out;
}

std::string Poly::to_string() const {
  if (terms_.empty()) return "0";
  static const std::array<const char*, 4> holo{"z1", "z2", "", ""};
  static const std::array<const char*, 4> real{"x1", "y1", "x2", "y2"};
  const auto& names = kind_ == Kind::holomorphic ? holo : real;
  std::ostringstream os;
  os.precision(17);
  bool first = true;
  for (const auto& [e, c] : terms_) {
    if (!first) os << " + ";
    first = false;
    if (c.imag() == 0.0) {
      os << c.real();
    } else {
      os << "(" << c.real() << (c.imag() < 0 ? "-" : "+") << std::abs(c.imag()) << "i)";
    }
    for (std::size_t k = 0; k < 4; ++k) {
      if (e[k] == 0) continue;
      os << "*" << names[k];
      if (e[k] > 1) os << "^" << e[k];
    }
  }
  return os.str();
}

// Recursive-descent parser:
//   expr   := term (('+'|'-') term)*
//   term   := unary ('*' unary | implicit-factor)*
//   unary  := ('+'|'-') unary | power
//   power  := atom ('^' integer)?
//   atom   := number ['i'] | 'i' | variable | '(' expr ')'
namespace {

class Parser {
 public:
  Parser(std::string_view text, Poly::Kind kind) : text_(text), kind_(kind) {}

  Poly parse() {
    Poly p = expr();
    skip_ws();
    if (pos_ != text_.size()) fail("unexpected character");
    return p;
  }

 private:
  [[noreturn]] void fail(const std::string& what) const {
    std::ostringstream os;
    os << "cannot parse polynomial '" << text_ << "': " << what << " at position " << pos_;
    throw ParameterError(os.str());
  }

  void skip_ws() {
    while (pos_ < text_.size() && std::isspace(static_cast<unsigned char>(text_[pos_]))) ++pos_;
  }

  char peek() {
    skip_ws();
    return pos_ < text_.size() ? text_[pos_] : '\0';
  }

  Poly expr() {
    Poly acc = term();
    for (;;) {
      const char c = peek();
      if (c == '+') {
        ++pos_;
        acc += term();
      } else if (c == '-') {
        ++pos_;
        acc -= term();
      } else {
        return acc;
      }
    }
  }

  Poly term() {
    Poly acc = unary();
    for (;;) {
      const char c = peek();
      if (c == '*') {
        ++pos_;
        acc = acc * unary();
      } else if (c == '(' || std::isalpha(static_cast<unsigned char>(c))) {
        acc = acc * power();  // implicit multiplication: "2z", "3(z+1)"
      } else {
        return acc;
      }
    }
  }

  Poly unary() {
    const char c = peek();
    if (c == '-') {
      ++pos_;
      return unary() * Complex{-1.0};
    }
    if (c == '+') {
      ++pos_;
      return unary();
    }
    return power();
  }

  Poly power() {
    Poly base = atom();
    if (peek() == '^') {
      ++pos_;
      skip_ws();
      const std::size_t start = pos_;
      while (pos_ < text_.size() && std::isdigit(static_cast<unsigned char>(text_[pos_]))) ++pos_;
      if (start == pos_) fail("expected integer exponent");
      const int n = std::stoi(std::string(text_.substr(start, pos_ - start)));
      Poly out = Poly::constant(1.0, kind_);
      for (int k = 0; k < n; ++k) out = out * base;
      return out;
    }
    return base;
  }

  Poly atom() {
    const char c = peek();
    if (c == '(') {
      ++pos_;
      Poly inner = expr();
      if (peek() != ')') fail("expected ')'");
      ++pos_;
      return inner;
    }
    if (std::isdigit(static_cast<unsigned char>(c)) || c == '.') {
      const char* begin = text_.data() + pos_;
      char* end = nullptr;
      const double value = std::strtod(begin, &end);
      if (end == begin) fail("bad number");
      pos_ += static_cast<std::size_t>(end - begin);
      if (pos_ < text_.size() && text_[pos_] == 'i' &&
          (pos_ + 1 == text_.size() || !std::isalnum(static_cast<unsigned char>(text_[pos_ + 1])))) {
        ++pos_;
        return Poly::constant(Complex{0.0, value}, kind_);
      }
      return Poly::constant(value, kind_);
    }
    if (std::isalpha(static_cast<unsigned char>(c))) {
      const std::size_t start = pos_;
      while (pos_ < text_.size() && std::isalnum(static_cast<unsigned char>(text_[pos_]))) ++pos_;
      const std::string name(text_.substr(start, pos_ - start));
      return named(name);
    }
    fail("unexpected token");
  }

  Poly named(const std::string& name) {
    if (name == "i") return Poly::constant(Complex{0.0, 1.0}, kind_);
    if (kind_ == Poly::Kind::holomorphic) {
      if (name == "z" || name == "z1") return Poly::variable(0, kind_);
      if (name == "z2") return Poly::variable(1, kind_);
    } else {
      if (name == "x" || name == "x1") return Poly::variable(0, kind_);
      if (name == "y" || name == "y1") return Poly::variable(1, kind_);
      if (name == "x2") return Poly::variable(2, kind_);
      if (name == "y2") return Poly::variable(3, kind_);
    }
    fail("unknown variable '" + name + "'");
  }

  std::string_view text_;
  Poly::Kind kind_;
  std::size_t pos_ = 0;
};

}  // namespace

Poly Poly::parse(std::string_view text, Kind kind) { return Parser(text, kind).parse(); }

}  // namespace bergext
