#include "bogo/field.hpp"

#include <cstdint>
#include <cstring>
#include <fstream>
#include <stdexcept>

#include <json.hpp>

namespace bogo {

const char *kind_name(FieldKind k) {
    switch (k) {
        case FieldKind::real_scalar: return "real";
        case FieldKind::complex_scalar: return "complex";
        case FieldKind::matrix2: return "matrix2";
    }
    return "?";
}

FieldKind kind_from_name(const std::string &s) {
    if (s == "real") return FieldKind::real_scalar;
    if (s == "complex") return FieldKind::complex_scalar;
    if (s == "matrix2") return FieldKind::matrix2;
    throw std::invalid_argument("unknown field kind: " + s);
}

double LatticeField::max_herm_defect() const {
    if (kind != FieldKind::matrix2) return 0.0;
    double worst = 0;
    for (std::int64_t i = 0; i < total_nodes(); ++i)
        worst = std::max(worst, get_m(i).herm_defect());
    return worst;
}

double LatticeField::max_abs() const {
    double worst = 0;
    for (double v : data) worst = std::max(worst, std::abs(v));
    return worst;
}

void save_field(const LatticeField &f, const std::string &path) {
    nlohmann::json hdr;
    hdr["kind"] = kind_name(f.kind);
    hdr["n_sigma"] = f.n;
    hdr["n_t"] = f.nt;
    hdr["period"] = f.period;
    hdr["component_count"] = components_of(f.kind);
    hdr["byte_order"] = "LE";
    hdr["dtype"] = "f64";
    std::string hs = hdr.dump();

    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot open for write: " + path);
    std::uint64_t hlen = hs.size();
    out.write(reinterpret_cast<const char *>(&hlen), 8);
    out.write(hs.data(), std::streamsize(hs.size()));
    out.write(reinterpret_cast<const char *>(f.data.data()),
              std::streamsize(f.data.size() * sizeof(double)));
    if (!out) throw std::runtime_error("short write: " + path);
}

LatticeField load_field(const std::string &path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot open: " + path);
    std::uint64_t hlen = 0;
    in.read(reinterpret_cast<char *>(&hlen), 8);
    if (!in || hlen > (1u << 20)) throw std::runtime_error("bad field header: " + path);
    std::string hs(hlen, '\0');
    in.read(hs.data(), std::streamsize(hlen));
    auto hdr = nlohmann::json::parse(hs);
    if (hdr.value("byte_order", "LE") != std::string("LE") ||
        hdr.value("dtype", "f64") != std::string("f64"))
        throw std::runtime_error("unsupported field encoding: " + path);

    LatticeField f;
    f.kind = kind_from_name(hdr.at("kind").get<std::string>());
    f.n = hdr.at("n_sigma").get<int>();
    f.nt = hdr.at("n_t").get<int>();
    f.period = hdr.at("period").get<double>();
    int comp = hdr.at("component_count").get<int>();
    if (comp != components_of(f.kind)) throw std::runtime_error("component_count mismatch");
    f.data.assign(std::size_t(f.total_nodes()) * comp, 0.0);
    in.read(reinterpret_cast<char *>(f.data.data()),
            std::streamsize(f.data.size() * sizeof(double)));
    if (!in) throw std::runtime_error("short read: " + path);
    return f;
}

LatticeField lin_comb(double ca, const LatticeField &a, double cb, const LatticeField &b) {
    if (a.kind != b.kind || a.data.size() != b.data.size())
        throw std::invalid_argument("lin_comb: shape mismatch");
    LatticeField r = a;
    for (std::size_t i = 0; i < r.data.size(); ++i) r.data[i] = ca * a.data[i] + cb * b.data[i];
    return r;
}

double max_abs_diff(const LatticeField &a, const LatticeField &b) {
    if (a.data.size() != b.data.size()) throw std::invalid_argument("max_abs_diff: shape mismatch");
    double worst = 0;
    for (std::size_t i = 0; i < a.data.size(); ++i)
        worst = std::max(worst, std::abs(a.data[i] - b.data[i]));
    return worst;
}

}  // namespace bogo
