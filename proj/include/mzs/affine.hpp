#ifndef MZS_AFFINE_HPP
#define MZS_AFFINE_HPP

#include <map>
#include <string>
#include <vector>

#include "mzs/complexval.hpp"

namespace mzs {

// Integer-coefficient affine combination of named symbols plus a complex
// constant.  This is the exponent language of symbolic terms: expressions
// like "s2+t+k", "-k" or "t-k-j".  Zero coefficients are never stored.
class AffineExpr {
  public:
    AffineExpr() = default;
    explicit AffineExpr(Complex c) : constant_(c) {}
    explicit AffineExpr(double c) : constant_(c, 0.0) {}
    static AffineExpr symbol(const std::string& name, long long coeff = 1);

    const Complex& constant() const { return constant_; }
    const std::map<std::string, long long>& terms() const { return terms_; }

    bool isZero() const { return terms_.empty() && constant_ == Complex(0.0, 0.0); }
    bool isConstant() const { return terms_.empty(); }
    // True when the expression is exactly -1 * <one symbol> with no constant;
    // this is the collapse trigger shape.
    bool isNegatedSymbol(std::string* name = nullptr) const;

    AffineExpr operator+(const AffineExpr& o) const;
    AffineExpr operator-(const AffineExpr& o) const;
    AffineExpr operator-() const;
    AffineExpr& operator+=(const AffineExpr& o);
    AffineExpr& operator-=(const AffineExpr& o);
    AffineExpr plusConst(Complex c) const;

    bool operator==(const AffineExpr& o) const {
        return constant_ == o.constant_ && terms_ == o.terms_;
    }
    bool operator!=(const AffineExpr& o) const { return !(*this == o); }
    bool operator<(const AffineExpr& o) const;  // arbitrary total order, for canonical sorting

    bool dependsOn(const std::string& name) const { return terms_.count(name) != 0; }
    long long coeffOf(const std::string& name) const;

    // Full evaluation; throws MissingTableEntry when a symbol is unbound.
    Complex eval(const std::map<std::string, Complex>& bindings) const;
    // Replaces bound symbols by constants, keeps the rest symbolic.
    AffineExpr substitute(const std::map<std::string, Complex>& bindings) const;
    // Renames symbols per the given map (unmapped symbols are kept).
    AffineExpr renamed(const std::map<std::string, std::string>& names) const;

    // Canonical text form, e.g. "s2+t-k-1", "-k", "2.5", "s1+(1.5+0.5i)".
    std::string str() const;
    // Parses the same grammar (integer or complex constants, +/- separated,
    // optional integer coefficient before a symbol).  Throws ParseError.
    static AffineExpr parse(const std::string& text);

  private:
    Complex constant_{0.0, 0.0};
    std::map<std::string, long long> terms_;
};

}  // namespace mzs

#endif
