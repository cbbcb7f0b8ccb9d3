#include "bogo/laurent.hpp"

#include <fstream>
#include <stdexcept>

#include <nlohmann/json.hpp>

namespace bogo {

LaurentPoly LaurentPoly::constant(cplx c) { return monomial(c, 0); }

LaurentPoly LaurentPoly::monomial(cplx c, int exponent) {
    LaurentPoly p;
    if (c != cplx(0)) {
        p.lo = exponent;
        p.coeff = {c};
    }
    return p;
}

cplx LaurentPoly::at(int exponent) const {
    int i = exponent - lo;
    if (i < 0 || i >= int(coeff.size())) return 0;
    return coeff[std::size_t(i)];
}

cplx LaurentPoly::eval(cplx z) const {
    if (coeff.empty()) return 0;
    cplx acc = 0;
    for (auto it = coeff.rbegin(); it != coeff.rend(); ++it) acc = acc * z + *it;
    cplx base = lo < 0 ? cplx(1) / z : z;
    for (int k = lo < 0 ? -lo : lo; k > 0; --k) acc *= base;
    return acc;
}

void LaurentPoly::trim() {
    std::size_t b = 0, e = coeff.size();
    while (e > b && coeff[e - 1] == cplx(0)) --e;
    while (b < e && coeff[b] == cplx(0)) ++b;
    if (b == e) {
        lo = 0;
        coeff.clear();
        return;
    }
    lo += int(b);
    coeff = std::vector<cplx>(coeff.begin() + long(b), coeff.begin() + long(e));
}

LaurentPoly operator+(const LaurentPoly &a, const LaurentPoly &b) {
    if (a.is_zero()) return b;
    if (b.is_zero()) return a;
    LaurentPoly r;
    r.lo = std::min(a.lo, b.lo);
    int hi = std::max(a.hi(), b.hi());
    r.coeff.assign(std::size_t(hi - r.lo + 1), cplx(0));
    for (std::size_t i = 0; i < a.coeff.size(); ++i) r.coeff[std::size_t(a.lo - r.lo) + i] += a.coeff[i];
    for (std::size_t i = 0; i < b.coeff.size(); ++i) r.coeff[std::size_t(b.lo - r.lo) + i] += b.coeff[i];
    r.trim();
    return r;
}

LaurentPoly operator-(const LaurentPoly &a, const LaurentPoly &b) { return a + cplx(-1) * b; }

LaurentPoly operator*(const LaurentPoly &a, const LaurentPoly &b) {
    if (a.is_zero() || b.is_zero()) return LaurentPoly{};
    LaurentPoly r;
    r.lo = a.lo + b.lo;
    r.coeff.assign(a.coeff.size() + b.coeff.size() - 1, cplx(0));
    for (std::size_t i = 0; i < a.coeff.size(); ++i)
        for (std::size_t j = 0; j < b.coeff.size(); ++j) r.coeff[i + j] += a.coeff[i] * b.coeff[j];
    r.trim();
    return r;
}

LaurentPoly operator*(cplx s, const LaurentPoly &a) {
    if (s == cplx(0)) return LaurentPoly{};
    LaurentPoly r = a;
    for (auto &c : r.coeff) c *= s;
    return r;
}

double max_coeff(const LaurentPoly &a) {
    double m = 0;
    for (const cplx &c : a.coeff) m = std::max(m, std::abs(c));
    return m;
}

double max_coeff_diff(const LaurentPoly &a, const LaurentPoly &b) {
    LaurentPoly d = a - b;
    return max_coeff(d);
}

void validate_weight(const Weight &w) {
    if (w.two_m < 0) throw std::invalid_argument("weight must be non-negative");
    if (w.group == Group::SU2 && w.two_m % 2 != 0)
        throw std::invalid_argument("SU(2) weight must be an integer");
}

LaurentMatrix LaurentMatrix::identity(int dim, Group group) {
    LaurentMatrix m;
    m.dim = dim;
    m.group = group;
    m.e.assign(std::size_t(dim) * dim, LaurentPoly{});
    for (int r = 0; r < dim; ++r) m.at(r, r) = LaurentPoly::constant(1);
    return m;
}

LaurentMatrix operator*(const LaurentMatrix &a, const LaurentMatrix &b) {
    if (a.dim != b.dim) throw std::invalid_argument("matrix dimension mismatch");
    LaurentMatrix r;
    r.dim = a.dim;
    r.group = a.group;
    r.e.assign(std::size_t(a.dim) * a.dim, LaurentPoly{});
    for (int i = 0; i < a.dim; ++i)
        for (int j = 0; j < a.dim; ++j) {
            LaurentPoly s;
            for (int k = 0; k < a.dim; ++k) s = s + a.at(i, k) * b.at(k, j);
            r.at(i, j) = s;
        }
    return r;
}

LaurentPoly det(const LaurentMatrix &a) {
    if (a.dim == 2) return a.at(0, 0) * a.at(1, 1) - a.at(0, 1) * a.at(1, 0);
    LaurentPoly s;
    s = s + a.at(0, 0) * (a.at(1, 1) * a.at(2, 2) - a.at(1, 2) * a.at(2, 1));
    s = s - a.at(0, 1) * (a.at(1, 0) * a.at(2, 2) - a.at(1, 2) * a.at(2, 0));
    s = s + a.at(0, 2) * (a.at(1, 0) * a.at(2, 1) - a.at(1, 1) * a.at(2, 0));
    return s;
}

double det_one_defect(const LaurentMatrix &a) {
    return max_coeff_diff(det(a), LaurentPoly::constant(1));
}

LaurentMatrix adjoint_rep(const LaurentMatrix &g) {
    if (g.dim != 2) throw std::invalid_argument("adjoint_rep expects a 2x2 loop");
    const LaurentPoly &a = g.at(0, 0), &b = g.at(0, 1), &c = g.at(1, 0), &d = g.at(1, 1);
    LaurentMatrix r;
    r.dim = 3;
    r.group = g.group;
    r.e.assign(9, LaurentPoly{});
    // columns are the images of E, H, F under X -> g X g^{-1} with det g = 1
    r.at(0, 0) = a * a;
    r.at(1, 0) = cplx(-1) * (a * c);
    r.at(2, 0) = cplx(-1) * (c * c);
    r.at(0, 1) = cplx(-2) * (a * b);
    r.at(1, 1) = a * d + b * c;
    r.at(2, 1) = cplx(2) * (c * d);
    r.at(0, 2) = cplx(-1) * (b * b);
    r.at(1, 2) = b * d;
    r.at(2, 2) = d * d;
    return r;
}

static const char *group_name(Group g) { return g == Group::SU2 ? "SU2" : "PSU2"; }

static Group group_from(const std::string &s) {
    if (s == "SU2") return Group::SU2;
    if (s == "PSU2") return Group::PSU2;
    throw std::runtime_error("unknown group: " + s);
}

void save_laurent(const LaurentMatrix &m, const std::string &path) {
    nlohmann::json j;
    j["format"] = "laurent-matrix/1";
    j["dim"] = m.dim;
    j["group"] = group_name(m.group);
    auto entries = nlohmann::json::array();
    for (const LaurentPoly &p : m.e) {
        nlohmann::json je;
        je["lo"] = p.lo;
        auto cs = nlohmann::json::array();
        for (const cplx &c : p.coeff) cs.push_back({c.real(), c.imag()});
        je["coeff"] = cs;
        entries.push_back(je);
    }
    j["entries"] = entries;
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot open for write: " + path);
    out << j.dump(2) << "\n";
}

LaurentMatrix load_laurent(const std::string &path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open: " + path);
    nlohmann::json j = nlohmann::json::parse(in);
    if (j.at("format") != "laurent-matrix/1")
        throw std::runtime_error("unsupported format in " + path);
    LaurentMatrix m;
    m.dim = j.at("dim").get<int>();
    m.group = group_from(j.at("group").get<std::string>());
    for (const auto &je : j.at("entries")) {
        LaurentPoly p;
        p.lo = je.at("lo").get<int>();
        for (const auto &c : je.at("coeff")) p.coeff.emplace_back(c[0].get<double>(), c[1].get<double>());
        p.trim();
        m.e.push_back(p);
    }
    if (int(m.e.size()) != m.dim * m.dim) throw std::runtime_error("entry count mismatch in " + path);
    return m;
}

}  // namespace bogo
