#pragma once

#include "germlens/linalg.hpp"

#include <sstream>
#include <string>
#include <vector>

namespace germlens {

struct Term {
    double coeff = 0.0;
    std::vector<int> exps;
};

/// Sparse multivariate polynomial with real coefficients.
class Polynomial {
public:
    Polynomial() = default;
    explicit Polynomial(int nvars) : nvars_(nvars) {}
    Polynomial(int nvars, std::vector<Term> terms) : nvars_(nvars), terms_(std::move(terms))
    {
        for (const Term& t : terms_) {
            if (static_cast<int>(t.exps.size()) != nvars_)
                throw std::invalid_argument("polynomial term arity " + std::to_string(t.exps.size()) +
                                            " does not match " + std::to_string(nvars_) + " variables");
            for (int e : t.exps)
                if (e < 0) throw std::invalid_argument("negative exponent in polynomial term");
        }
    }

    /// Coefficient list form: each row is [coeff, e_1, ..., e_n].
    static Polynomial from_rows(int nvars, const std::vector<std::vector<double>>& rows)
    {
        std::vector<Term> terms;
        for (const auto& row : rows) {
            if (static_cast<int>(row.size()) != nvars + 1)
                throw std::invalid_argument("polynomial row needs 1 + " + std::to_string(nvars) + " entries");
            Term t;
            t.coeff = row[0];
            for (int i = 0; i < nvars; ++i) {
                const double e = row[i + 1];
                if (e != std::floor(e) || e < 0) throw std::invalid_argument("exponents must be nonnegative integers");
                t.exps.push_back(static_cast<int>(e));
            }
            terms.push_back(std::move(t));
        }
        return Polynomial(nvars, std::move(terms));
    }

    int nvars() const { return nvars_; }
    const std::vector<Term>& terms() const { return terms_; }

    int degree() const
    {
        int d = 0;
        for (const Term& t : terms_) {
            int s = 0;
            for (int e : t.exps) s += e;
            d = std::max(d, s);
        }
        return d;
    }

    bool is_linear_homogeneous() const
    {
        for (const Term& t : terms_) {
            int s = 0;
            for (int e : t.exps) s += e;
            if (s != 1 && t.coeff != 0.0) return false;
        }
        return true;
    }

    double operator()(const Point& x) const
    {
        double acc = 0.0;
        for (const Term& t : terms_) {
            double v = t.coeff;
            for (int i = 0; i < nvars_; ++i)
                if (t.exps[i]) v *= ipow(x[i], t.exps[i]);
            acc += v;
        }
        return acc;
    }

    Point gradient(const Point& x) const
    {
        Point g = Point::Zero(nvars_);
        for (const Term& t : terms_) {
            for (int k = 0; k < nvars_; ++k) {
                if (t.exps[k] == 0) continue;
                double v = t.coeff * t.exps[k];
                for (int i = 0; i < nvars_; ++i) {
                    const int e = i == k ? t.exps[i] - 1 : t.exps[i];
                    if (e) v *= ipow(x[i], e);
                }
                g[k] += v;
            }
        }
        return g;
    }

    std::string str() const
    {
        static const char* names[] = {"x", "y", "z", "w"};
        std::ostringstream os;
        os.precision(17);
        bool first = true;
        for (const Term& t : terms_) {
            os << (first ? "" : " + ") << t.coeff;
            first = false;
            for (int i = 0; i < nvars_; ++i) {
                if (!t.exps[i]) continue;
                os << "*" << (i < 4 ? std::string(names[i]) : "x" + std::to_string(i + 1));
                if (t.exps[i] > 1) os << "^" << t.exps[i];
            }
        }
        return first ? "0" : os.str();
    }

private:
    static double ipow(double b, int e)
    {
        double r = 1.0;
        while (e) {
            if (e & 1) r *= b;
            b *= b;
            e >>= 1;
        }
        return r;
    }

    int nvars_ = 0;
    std::vector<Term> terms_;
};

}  // namespace germlens
