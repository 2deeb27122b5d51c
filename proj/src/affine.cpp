#include "mzs/affine.hpp"

#include <cctype>
#include <cstdlib>
#include <sstream>

namespace mzs {

AffineExpr AffineExpr::symbol(const std::string& name, long long coeff) {
    AffineExpr e;
    if (coeff != 0) e.terms_[name] = coeff;
    return e;
}

bool AffineExpr::isNegatedSymbol(std::string* name) const {
    if (constant_ != Complex(0.0, 0.0) || terms_.size() != 1) return false;
    const auto& [sym, coeff] = *terms_.begin();
    if (coeff != -1) return false;
    if (name) *name = sym;
    return true;
}

AffineExpr& AffineExpr::operator+=(const AffineExpr& o) {
    constant_ += o.constant_;
    for (const auto& [sym, c] : o.terms_) {
        long long v = (terms_.count(sym) ? terms_[sym] : 0) + c;
        if (v == 0)
            terms_.erase(sym);
        else
            terms_[sym] = v;
    }
    return *this;
}

AffineExpr& AffineExpr::operator-=(const AffineExpr& o) { return *this += -o; }

AffineExpr AffineExpr::operator+(const AffineExpr& o) const {
    AffineExpr r = *this;
    r += o;
    return r;
}

AffineExpr AffineExpr::operator-(const AffineExpr& o) const {
    AffineExpr r = *this;
    r -= o;
    return r;
}

AffineExpr AffineExpr::operator-() const {
    AffineExpr r;
    r.constant_ = -constant_;
    for (const auto& [sym, c] : terms_) r.terms_[sym] = -c;
    return r;
}

AffineExpr AffineExpr::plusConst(Complex c) const {
    AffineExpr r = *this;
    r.constant_ += c;
    return r;
}

bool AffineExpr::operator<(const AffineExpr& o) const {
    if (terms_ != o.terms_) return terms_ < o.terms_;
    if (constant_.real() != o.constant_.real()) return constant_.real() < o.constant_.real();
    return constant_.imag() < o.constant_.imag();
}

long long AffineExpr::coeffOf(const std::string& name) const {
    auto it = terms_.find(name);
    return it == terms_.end() ? 0 : it->second;
}

Complex AffineExpr::eval(const std::map<std::string, Complex>& bindings) const {
    Complex v = constant_;
    for (const auto& [sym, c] : terms_) {
        auto it = bindings.find(sym);
        if (it == bindings.end())
            throw MissingTableEntry("unbound symbol '" + sym + "' in " + str());
        v += static_cast<double>(c) * it->second;
    }
    return v;
}

AffineExpr AffineExpr::substitute(const std::map<std::string, Complex>& bindings) const {
    AffineExpr r;
    r.constant_ = constant_;
    for (const auto& [sym, c] : terms_) {
        auto it = bindings.find(sym);
        if (it == bindings.end())
            r.terms_[sym] = c;
        else
            r.constant_ += static_cast<double>(c) * it->second;
    }
    return r;
}

AffineExpr AffineExpr::renamed(const std::map<std::string, std::string>& names) const {
    AffineExpr r;
    r.constant_ = constant_;
    for (const auto& [sym, c] : terms_) {
        auto it = names.find(sym);
        const std::string& n = it == names.end() ? sym : it->second;
        r.terms_[n] += c;
        if (r.terms_[n] == 0) r.terms_.erase(n);
    }
    return r;
}

namespace {

void appendNumber(std::ostream& os, double v) {
    std::ostringstream tmp;
    tmp.precision(17);
    tmp << v;
    os << tmp.str();
}

}  // namespace

std::string formatComplex(const Complex& z) {
    std::ostringstream os;
    if (z.imag() == 0.0) {
        appendNumber(os, z.real());
    } else if (z.real() == 0.0) {
        appendNumber(os, z.imag());
        os << "i";
    } else {
        os << "(";
        appendNumber(os, z.real());
        os << (z.imag() < 0 ? "-" : "+");
        appendNumber(os, std::abs(z.imag()));
        os << "i)";
    }
    return os.str();
}

std::string AffineExpr::str() const {
    if (isZero()) return "0";
    std::ostringstream os;
    bool first = true;
    for (const auto& [sym, c] : terms_) {
        if (c < 0)
            os << "-";
        else if (!first)
            os << "+";
        if (std::abs(c) != 1) os << std::abs(c);
        os << sym;
        first = false;
    }
    if (constant_ != Complex(0.0, 0.0)) {
        if (constant_.imag() == 0.0) {
            double re = constant_.real();
            if (!first && re >= 0) os << "+";
            appendNumber(os, re);
        } else {
            if (!first) os << "+";
            os << formatComplex(constant_);
        }
    }
    return os.str();
}

namespace {

struct Cursor {
    const std::string& s;
    size_t i = 0;
    bool done() const { return i >= s.size(); }
    char peek() const { return s[i]; }
};

// number := digits [ '.' digits ]; returns false if no digits at cursor.
bool scanNumber(Cursor& c, double* out, bool* sawDot) {
    size_t start = c.i;
    *sawDot = false;
    while (!c.done() && (std::isdigit(static_cast<unsigned char>(c.peek())) || c.peek() == '.')) {
        if (c.peek() == '.') *sawDot = true;
        ++c.i;
    }
    if (c.i == start) return false;
    *out = std::strtod(c.s.substr(start, c.i - start).c_str(), nullptr);
    return true;
}

}  // namespace

Complex parseComplex(const std::string& text) {
    AffineExpr e = AffineExpr::parse(text);
    if (!e.isConstant()) throw ParseError("expected a numeric constant: " + text);
    return e.constant();
}

AffineExpr AffineExpr::parse(const std::string& text) {
    AffineExpr result;
    Cursor c{text};
    auto skipSpace = [&] {
        while (!c.done() && std::isspace(static_cast<unsigned char>(c.peek()))) ++c.i;
    };
    skipSpace();
    if (c.done()) throw ParseError("empty affine expression");
    bool first = true;
    while (true) {
        skipSpace();
        if (c.done()) break;
        long long sign = 1;
        if (c.peek() == '+' || c.peek() == '-') {
            sign = c.peek() == '-' ? -1 : 1;
            ++c.i;
            skipSpace();
        } else if (!first) {
            throw ParseError("expected '+' or '-' in: " + text);
        }
        first = false;
        if (c.done()) throw ParseError("dangling sign in: " + text);
        if (c.peek() == '(') {
            // parenthesised complex constant, e.g. (1.5+0.5i)
            size_t close = text.find(')', c.i);
            if (close == std::string::npos) throw ParseError("unbalanced '(' in: " + text);
            AffineExpr inner = parse(text.substr(c.i + 1, close - c.i - 1));
            if (!inner.isConstant()) throw ParseError("non-constant parenthesis in: " + text);
            result.constant_ += static_cast<double>(sign) * inner.constant();
            c.i = close + 1;
            continue;
        }
        double num = 0.0;
        bool sawDot = false;
        bool haveNum = scanNumber(c, &num, &sawDot);
        if (!c.done() && c.peek() == 'i' &&
            (c.i + 1 >= text.size() ||
             !std::isalnum(static_cast<unsigned char>(text[c.i + 1])))) {
            // imaginary constant ("i", "2i", "0.5i")
            ++c.i;
            result.constant_ += Complex(0.0, sign * (haveNum ? num : 1.0));
            continue;
        }
        if (!c.done() && (std::isalpha(static_cast<unsigned char>(c.peek())) || c.peek() == '_')) {
            if (haveNum && sawDot) throw ParseError("fractional symbol coefficient in: " + text);
            size_t start = c.i;
            while (!c.done() && (std::isalnum(static_cast<unsigned char>(c.peek())) || c.peek() == '_'))
                ++c.i;
            std::string sym = text.substr(start, c.i - start);
            long long coeff = sign * (haveNum ? static_cast<long long>(num) : 1);
            result += AffineExpr::symbol(sym, coeff);
            continue;
        }
        if (haveNum) {
            result.constant_ += Complex(sign * num, 0.0);
            continue;
        }
        throw ParseError("unexpected character '" + std::string(1, c.peek()) + "' in: " + text);
    }
    return result;
}

}  // namespace mzs
