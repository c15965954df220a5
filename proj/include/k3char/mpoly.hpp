#pragma once

// Exact multivariate polynomials over Z and the text grammar used for
// surface input:
//
//   expr   := ['+'|'-'] term (('+'|'-') term)*
//   term   := factor ('*' factor)*
//   factor := base ('^' uint)?
//   base   := int | var | '(' expr ')'
//   var    := 'X' digits
//
// Implicit multiplication is rejected.

#include <gmpxx.h>

#include <cctype>
#include <cstdint>
#include <map>
#include <optional>
#include <ostream>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "k3char/error.hpp"
#include "k3char/qnum.hpp"

namespace k3char {

using Exponents = std::vector<unsigned>;

inline unsigned degree_of(const Exponents& e) {
    unsigned d = 0;
    for (unsigned x : e) d += x;
    return d;
}

/// Graded lexicographic order, largest first: higher total degree wins, ties
/// broken lexicographically with X0 > X1 > ... .
struct GradedLexGreater {
    bool operator()(const Exponents& a, const Exponents& b) const {
        unsigned da = degree_of(a), db = degree_of(b);
        if (da != db) return da > db;
        return a > b;
    }
};

class ParseError : public InputError {
public:
    ParseError(const std::string& what, std::size_t position)
        : InputError("parse error at position " + std::to_string(position) + ": " + what), position_(position) {}
    std::size_t position() const { return position_; }

private:
    std::size_t position_;
};

class MultiPoly {
public:
    using TermMap = std::map<Exponents, Integer, GradedLexGreater>;

    explicit MultiPoly(std::size_t nvars = 0) : nvars_(nvars) {}

    static MultiPoly constant(std::size_t nvars, const Integer& c) {
        MultiPoly p(nvars);
        if (c != 0) p.terms_.emplace(Exponents(nvars, 0), c);
        return p;
    }
    static MultiPoly variable(std::size_t nvars, std::size_t index) {
        if (index >= nvars) throw InputError("variable X" + std::to_string(index) + " out of range");
        Exponents e(nvars, 0);
        e[index] = 1;
        return monomial(e, 1);
    }
    static MultiPoly monomial(const Exponents& e, const Integer& c) {
        MultiPoly p(e.size());
        if (c != 0) p.terms_.emplace(e, c);
        return p;
    }

    std::size_t nvars() const { return nvars_; }
    const TermMap& terms() const { return terms_; }
    bool is_zero() const { return terms_.empty(); }
    std::size_t term_count() const { return terms_.size(); }

    Integer coefficient(const Exponents& e) const {
        auto it = terms_.find(e);
        return it == terms_.end() ? Integer(0) : it->second;
    }

    /// Adds c * x^e in place.
    void add_term(const Exponents& e, const Integer& c) {
        if (e.size() != nvars_) throw InputError("exponent vector length mismatch");
        if (c == 0) return;
        auto [it, inserted] = terms_.try_emplace(e, c);
        if (!inserted) {
            it->second += c;
            if (it->second == 0) terms_.erase(it);
        }
    }

    /// Maximum total degree; 0 for the zero polynomial.
    unsigned total_degree() const { return terms_.empty() ? 0 : degree_of(terms_.begin()->first); }

    std::optional<unsigned> homogeneous_degree() const {
        if (terms_.empty()) return std::nullopt;
        unsigned d = degree_of(terms_.begin()->first);
        for (const auto& [e, c] : terms_) {
            if (degree_of(e) != d) return std::nullopt;
        }
        return d;
    }
    bool is_homogeneous() const { return homogeneous_degree().has_value(); }

    MultiPoly operator-() const {
        MultiPoly r = *this;
        for (auto& [e, c] : r.terms_) c = -c;
        return r;
    }
    MultiPoly& operator+=(const MultiPoly& o) {
        check_compatible(o);
        for (const auto& [e, c] : o.terms_) add_term(e, c);
        return *this;
    }
    MultiPoly& operator-=(const MultiPoly& o) {
        check_compatible(o);
        for (const auto& [e, c] : o.terms_) add_term(e, -c);
        return *this;
    }
    friend MultiPoly operator+(MultiPoly a, const MultiPoly& b) { return a += b; }
    friend MultiPoly operator-(MultiPoly a, const MultiPoly& b) { return a -= b; }

    friend MultiPoly operator*(const MultiPoly& a, const MultiPoly& b) {
        a.check_compatible(b);
        MultiPoly r(a.nvars_);
        Exponents e(a.nvars_);
        for (const auto& [ea, ca] : a.terms_) {
            for (const auto& [eb, cb] : b.terms_) {
                for (std::size_t i = 0; i < e.size(); ++i) e[i] = ea[i] + eb[i];
                r.add_term(e, ca * cb);
            }
        }
        return r;
    }
    MultiPoly& operator*=(const MultiPoly& o) { return *this = *this * o; }

    MultiPoly scale(const Integer& lambda) const {
        if (lambda == 0) return MultiPoly(nvars_);
        MultiPoly r = *this;
        for (auto& [e, c] : r.terms_) c *= lambda;
        return r;
    }

    MultiPoly pow(unsigned n) const {
        MultiPoly result = constant(nvars_, 1);
        MultiPoly base = *this;
        while (n > 0) {
            if (n & 1u) result *= base;
            n >>= 1;
            if (n > 0) base *= base;
        }
        return result;
    }

    MultiPoly partial_derivative(std::size_t var) const {
        if (var >= nvars_) throw InputError("partial_derivative: variable index out of range");
        MultiPoly r(nvars_);
        for (const auto& [e, c] : terms_) {
            if (e[var] == 0) continue;
            Exponents d = e;
            --d[var];
            r.add_term(d, c * e[var]);
        }
        return r;
    }

    /// Simultaneous substitution X_i -> images[i]; all images share one nvars.
    MultiPoly substitute(std::span<const MultiPoly> images) const {
        if (images.size() != nvars_) throw InputError("substitute: need one image per variable");
        std::size_t target = images.empty() ? 0 : images[0].nvars();
        for (const auto& im : images) {
            if (im.nvars() != target) throw InputError("substitute: images disagree on nvars");
        }
        std::vector<std::vector<MultiPoly>> powers(nvars_);
        MultiPoly r(target);
        for (const auto& [e, c] : terms_) {
            MultiPoly term = constant(target, c);
            for (std::size_t i = 0; i < nvars_; ++i) {
                auto& cache = powers[i];
                if (cache.empty()) cache.push_back(constant(target, 1));
                while (cache.size() <= e[i]) cache.push_back(cache.back() * images[i]);
                if (e[i] > 0) term *= cache[e[i]];
            }
            r += term;
        }
        return r;
    }

    /// Replaces a single variable by a polynomial in the same ring.
    MultiPoly substitute(std::size_t var, const MultiPoly& image) const {
        if (var >= nvars_) throw InputError("substitute: variable index out of range");
        check_compatible(image);
        std::vector<MultiPoly> images;
        for (std::size_t i = 0; i < nvars_; ++i) images.push_back(i == var ? image : variable(nvars_, i));
        return substitute(images);
    }

    Integer evaluate(std::span<const Integer> point) const {
        if (point.size() != nvars_) throw InputError("evaluate: point dimension mismatch");
        Integer sum = 0;
        for (const auto& [e, c] : terms_) {
            Integer t = c;
            for (std::size_t i = 0; i < nvars_; ++i) {
                if (e[i] > 0) t *= integer_pow(point[i], e[i]);
            }
            sum += t;
        }
        return sum;
    }

    /// Canonical serialization: graded-lex descending, ASCII decimal
    /// coefficient on every term, every exponent explicit, e.g.
    /// "1*X0^2*X1^0-3*X0^0*X1^2". The zero polynomial is "0". The output is
    /// itself valid input for parse().
    std::string canonical_string() const {
        if (terms_.empty()) return "0";
        std::string out;
        bool first = true;
        for (const auto& [e, c] : terms_) {
            if (!first && c > 0) out += '+';
            out += c.get_str();
            for (std::size_t i = 0; i < nvars_; ++i) {
                out += "*X" + std::to_string(i) + "^" + std::to_string(e[i]);
            }
            first = false;
        }
        return out;
    }

    /// Human-oriented rendering in the same grammar ("X0^4+2*X0*X1-X2^4").
    std::string to_string() const {
        if (terms_.empty()) return "0";
        std::string out;
        bool first = true;
        for (const auto& [e, c] : terms_) {
            Integer mag = abs(c);
            if (c < 0) out += '-';
            else if (!first) out += '+';
            std::string mono;
            for (std::size_t i = 0; i < nvars_; ++i) {
                if (e[i] == 0) continue;
                if (!mono.empty()) mono += '*';
                mono += "X" + std::to_string(i);
                if (e[i] > 1) mono += "^" + std::to_string(e[i]);
            }
            if (mono.empty()) out += mag.get_str();
            else if (mag == 1) out += mono;
            else out += mag.get_str() + "*" + mono;
            first = false;
        }
        return out;
    }

    /// 64-bit FNV-1a over canonical_string().
    std::uint64_t canonical_hash() const { return fnv1a64(canonical_string()); }

    static std::uint64_t fnv1a64(std::string_view bytes, std::uint64_t h = 0xcbf29ce484222325ULL) {
        for (unsigned char ch : bytes) {
            h ^= ch;
            h *= 0x100000001b3ULL;
        }
        return h;
    }

    friend bool operator==(const MultiPoly& a, const MultiPoly& b) {
        return a.nvars_ == b.nvars_ && a.terms_ == b.terms_;
    }
    friend std::ostream& operator<<(std::ostream& os, const MultiPoly& p) { return os << p.to_string(); }

private:
    void check_compatible(const MultiPoly& o) const {
        if (o.nvars_ != nvars_) {
            throw InputError("polynomials live in different rings (" + std::to_string(nvars_) + " vs " +
                             std::to_string(o.nvars_) + " variables)");
        }
    }

    std::size_t nvars_;
    TermMap terms_;
};

namespace detail {

class PolyParser {
public:
    PolyParser(std::string_view text, std::size_t nvars) : text_(text), nvars_(nvars) {}

    MultiPoly parse() {
        MultiPoly p = expr();
        skip_ws();
        if (pos_ != text_.size()) fail(std::string("unexpected character '") + text_[pos_] + "'");
        return p;
    }

private:
    static constexpr unsigned kMaxExponent = 1000;

    [[noreturn]] void fail(const std::string& what) const { throw ParseError(what, pos_); }

    void skip_ws() {
        while (pos_ < text_.size() && std::isspace(static_cast<unsigned char>(text_[pos_]))) ++pos_;
    }
    bool peek(char c) {
        skip_ws();
        return pos_ < text_.size() && text_[pos_] == c;
    }
    bool accept(char c) {
        if (peek(c)) {
            ++pos_;
            return true;
        }
        return false;
    }

    MultiPoly expr() {
        bool negate = false;
        if (accept('-')) negate = true;
        else accept('+');
        MultiPoly acc = term();
        if (negate) acc = -acc;
        for (;;) {
            if (accept('+')) acc += term();
            else if (accept('-')) acc -= term();
            else break;
        }
        return acc;
    }

    MultiPoly term() {
        MultiPoly acc = factor();
        while (accept('*')) acc *= factor();
        skip_ws();
        if (pos_ < text_.size() && (text_[pos_] == 'X' || text_[pos_] == '(' ||
                                    std::isdigit(static_cast<unsigned char>(text_[pos_])))) {
            fail("implicit multiplication is not allowed; use '*'");
        }
        return acc;
    }

    MultiPoly factor() {
        MultiPoly b = base();
        if (accept('^')) {
            skip_ws();
            std::size_t start = pos_;
            while (pos_ < text_.size() && std::isdigit(static_cast<unsigned char>(text_[pos_]))) ++pos_;
            if (start == pos_) fail("exponent must be a non-negative integer literal");
            if (pos_ < text_.size() && (text_[pos_] == '.' || text_[pos_] == '/')) {
                fail("exponent must be a non-negative integer literal");
            }
            std::string digits(text_.substr(start, pos_ - start));
            if (digits.size() > 6 || std::stoul(digits) > kMaxExponent) fail("exponent too large");
            b = b.pow(static_cast<unsigned>(std::stoul(digits)));
        }
        return b;
    }

    MultiPoly base() {
        skip_ws();
        if (pos_ >= text_.size()) fail("unexpected end of input");
        char c = text_[pos_];
        if (c == '(') {
            ++pos_;
            MultiPoly inner = expr();
            if (!accept(')')) fail("expected ')'");
            return inner;
        }
        if (std::isdigit(static_cast<unsigned char>(c))) {
            std::size_t start = pos_;
            while (pos_ < text_.size() && std::isdigit(static_cast<unsigned char>(text_[pos_]))) ++pos_;
            if (pos_ < text_.size() && text_[pos_] == '.') fail("only integer literals are allowed");
            return MultiPoly::constant(nvars_, Integer(std::string(text_.substr(start, pos_ - start))));
        }
        if (c == 'X') {
            std::size_t start = ++pos_;
            while (pos_ < text_.size() && std::isdigit(static_cast<unsigned char>(text_[pos_]))) ++pos_;
            if (start == pos_) fail("variable name must be X followed by an index");
            std::string digits(text_.substr(start, pos_ - start));
            if (digits.size() > 6 || std::stoul(digits) >= nvars_) {
                pos_ = start - 1;
                fail("unknown variable X" + digits + " (ring has " + std::to_string(nvars_) + " variables)");
            }
            return MultiPoly::variable(nvars_, std::stoul(digits));
        }
        fail(std::string("unexpected character '") + c + "'");
    }

    std::string_view text_;
    std::size_t nvars_;
    std::size_t pos_ = 0;
};

}  // namespace detail

/// Parses a polynomial in X0..X{nvars-1}.
inline MultiPoly parse(std::string_view text, std::size_t nvars) { return detail::PolyParser(text, nvars).parse(); }

}  // namespace k3char
