// SPDX-License-Identifier: Apache-2.0

#include "hypersindy/library.hpp"

#include "hypersindy/errors.hpp"

#include <algorithm>
#include <sstream>

namespace hypersindy {
namespace {

long long binomial(int n, int k) {
    if (k < 0 || k > n) return 0;
    long long result = 1;
    for (int i = 1; i <= k; ++i) {
        result = result * (n - k + i) / i;
    }
    return result;
}

void emit_terms_of_degree(int n, int degree, std::vector<int>& prefix, int pos, int remaining,
                          std::vector<Term>& out) {
    if (pos == n - 1) {
        prefix[pos] = remaining;
        out.push_back(Term{prefix});
        return;
    }
    // Descending first exponent gives descending lexicographic order.
    for (int e = remaining; e >= 0; --e) {
        prefix[pos] = e;
        emit_terms_of_degree(n, degree, prefix, pos + 1, remaining - e, out);
    }
}

} // namespace

int LibrarySpec::term_count() const {
    validate();
    const long long total = binomial(state_dim + max_degree, max_degree);
    return static_cast<int>(total - (include_constant ? 0 : 1));
}

void LibrarySpec::validate() const {
    if (state_dim < 1) throw ConfigError("library: state_dim must be >= 1");
    if (max_degree < 1) throw ConfigError("library: max_degree must be >= 1");
}

int Term::degree() const {
    int d = 0;
    for (int e : exponents) d += e;
    return d;
}

std::string Term::display() const {
    if (degree() == 0) return "1";
    std::ostringstream os;
    bool first = true;
    for (std::size_t i = 0; i < exponents.size(); ++i) {
        if (exponents[i] == 0) continue;
        if (!first) os << '*';
        os << 'x' << (i + 1);
        if (exponents[i] > 1) os << '^' << exponents[i];
        first = false;
    }
    return os.str();
}

std::vector<Term> build_library(const LibrarySpec& spec) {
    spec.validate();
    std::vector<Term> terms;
    terms.reserve(static_cast<std::size_t>(spec.term_count()));
    std::vector<int> prefix(static_cast<std::size_t>(spec.state_dim), 0);
    for (int degree = spec.include_constant ? 0 : 1; degree <= spec.max_degree; ++degree) {
        emit_terms_of_degree(spec.state_dim, degree, prefix, 0, degree, terms);
    }
    return terms;
}

void evaluate_library(const LibrarySpec& spec, std::span<const double> states, int rows,
                      std::span<double> out) {
    const int n = spec.state_dim;
    const auto terms = build_library(spec);
    const int l = static_cast<int>(terms.size());
    if (states.size() != static_cast<std::size_t>(rows) * n) {
        throw ShapeError("evaluate_library: state buffer does not match rows x state_dim");
    }
    if (out.size() != static_cast<std::size_t>(rows) * l) {
        throw ShapeError("evaluate_library: output buffer does not match rows x term_count");
    }
    for (int r = 0; r < rows; ++r) {
        const double* x = states.data() + static_cast<std::size_t>(r) * n;
        double* row = out.data() + static_cast<std::size_t>(r) * l;
        for (int j = 0; j < l; ++j) {
            double value = 1.0;
            const auto& e = terms[static_cast<std::size_t>(j)].exponents;
            for (int i = 0; i < n; ++i) {
                for (int p = 0; p < e[static_cast<std::size_t>(i)]; ++p) {
                    value *= x[i];
                }
            }
            row[j] = value;
        }
    }
}

std::vector<double> evaluate_library(const LibrarySpec& spec, std::span<const double> states,
                                     int rows) {
    std::vector<double> out(static_cast<std::size_t>(rows) * spec.term_count());
    evaluate_library(spec, states, rows, out);
    return out;
}

int term_index(const LibrarySpec& spec, std::span<const int> exponents) {
    const auto terms = build_library(spec);
    if (exponents.size() != static_cast<std::size_t>(spec.state_dim)) {
        throw ContractError("term_index: exponent vector length mismatch");
    }
    for (std::size_t k = 0; k < terms.size(); ++k) {
        if (std::equal(exponents.begin(), exponents.end(), terms[k].exponents.begin(),
                       terms[k].exponents.end())) {
            return static_cast<int>(k);
        }
    }
    std::ostringstream os;
    os << "term_index: exponents (";
    for (std::size_t i = 0; i < exponents.size(); ++i) {
        if (i) os << ',';
        os << exponents[i];
    }
    os << ") not in library";
    throw ContractError(os.str());
}

} // namespace hypersindy
