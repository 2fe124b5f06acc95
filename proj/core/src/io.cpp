#include "micromotion/io.hpp"

#include <openssl/evp.h>

#include <cstdint>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "micromotion/error.hpp"

namespace micromotion {

std::string sha256_hex(std::string_view data) {
    unsigned char digest[EVP_MAX_MD_SIZE];
    unsigned int len = 0;
    if (EVP_Digest(data.data(), data.size(), digest, &len, EVP_sha256(), nullptr) != 1)
        throw NumericalError("sha256 digest failed");
    static const char* hex = "0123456789abcdef";
    std::string out;
    out.reserve(2 * len);
    for (unsigned int i = 0; i < len; ++i) {
        out.push_back(hex[digest[i] >> 4]);
        out.push_back(hex[digest[i] & 0xF]);
    }
    return out;
}

std::string format_number(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

void RunManifest::set(const std::string& key, const std::string& value) {
    for (auto& [k, v] : entries) {
        if (k == key) {
            v = value;
            return;
        }
    }
    entries.emplace_back(key, value);
}

std::string RunManifest::text() const {
    std::string out = "command = " + command + "\n";
    for (const auto& [k, v] : entries) out += k + " = " + v + "\n";
    return out;
}

RunManifest make_manifest(const std::string& command, const RunConfig& cfg) {
    RunManifest m;
    m.command = command;
    m.entries = describe(cfg);
    return m;
}

std::string CsvTable::str() const {
    std::string out;
    for (const auto& c : comments) out += "# " + c + "\n";
    for (std::size_t i = 0; i < columns.size(); ++i) out += (i ? "," : "") + columns[i];
    out += "\n";
    for (const auto& r : rows) {
        for (std::size_t i = 0; i < r.size(); ++i) out += (i ? "," : "") + r[i];
        out += "\n";
    }
    return out;
}

void CsvTable::write(const std::filesystem::path& path) const { write_text(path, str()); }

void write_text(const std::filesystem::path& path, const std::string& text) {
    std::error_code ec;
    if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path(), ec);
    std::ofstream out(path, std::ios::binary);
    if (!out) throw ConfigError("cannot write '" + path.string() + "'");
    out << text;
    if (!out) throw ConfigError("write failed for '" + path.string() + "'");
}

std::string basis_cache_key(const RunConfig& cfg) {
    static const char* fields[] = {"a",          "q",          "omega_rad_s",           "m_ion_kg",
                                   "m_atom_kg",  "polarizability_term", "short_range_phase", "mass_convention",
                                   "x_max",      "points_per_wavelength", "energy_min",     "energy_max",
                                   "max_states", "r_min_target"};
    const auto all = describe(cfg);
    std::string text = "basis-v1\n";
    for (const char* f : fields) {
        for (const auto& [k, v] : all)
            if (k == f) text += k + " = " + v + "\n";
    }
    return sha256_hex(text).substr(0, 16);
}

namespace {

constexpr char kMagic[8] = {'M', 'M', 'B', 'A', 'S', 'I', 'S', '1'};

class Writer {
public:
    explicit Writer(std::ostream& out) : out_(out) {}
    template <class T>
    void pod(const T& v) {
        out_.write(reinterpret_cast<const char*>(&v), sizeof(T));
    }
    void str(const std::string& s) {
        pod(std::uint64_t(s.size()));
        out_.write(s.data(), std::streamsize(s.size()));
    }
    template <class T>
    void vec(const std::vector<T>& v) {
        pod(std::uint64_t(v.size()));
        out_.write(reinterpret_cast<const char*>(v.data()), std::streamsize(v.size() * sizeof(T)));
    }
    void mat(const Eigen::MatrixXd& m) {
        pod(std::int64_t(m.rows()));
        pod(std::int64_t(m.cols()));
        out_.write(reinterpret_cast<const char*>(m.data()), std::streamsize(m.size() * sizeof(double)));
    }

private:
    std::ostream& out_;
};

class Reader {
public:
    explicit Reader(std::istream& in) : in_(in) {}
    template <class T>
    T pod() {
        T v{};
        in_.read(reinterpret_cast<char*>(&v), sizeof(T));
        check();
        return v;
    }
    std::string str() {
        const auto n = pod<std::uint64_t>();
        if (n > (1u << 20)) throw NumericalError("basis cache: corrupt string length");
        std::string s(n, '\0');
        in_.read(s.data(), std::streamsize(n));
        check();
        return s;
    }
    template <class T>
    std::vector<T> vec() {
        const auto n = pod<std::uint64_t>();
        if (n > (1u << 26)) throw NumericalError("basis cache: corrupt vector length");
        std::vector<T> v(static_cast<std::size_t>(n));
        in_.read(reinterpret_cast<char*>(v.data()), std::streamsize(n * sizeof(T)));
        check();
        return v;
    }
    Eigen::MatrixXd mat() {
        const auto r = pod<std::int64_t>();
        const auto c = pod<std::int64_t>();
        if (r < 0 || c < 0 || r * c > (std::int64_t(1) << 26)) throw NumericalError("basis cache: corrupt matrix shape");
        Eigen::MatrixXd m(r, c);
        in_.read(reinterpret_cast<char*>(m.data()), std::streamsize(m.size() * sizeof(double)));
        check();
        return m;
    }

private:
    void check() {
        if (!in_) throw NumericalError("basis cache: truncated file");
    }
    std::istream& in_;
};

}  // namespace

void save_basis(const UnperturbedBasis& basis, const std::string& key, const std::filesystem::path& path) {
    std::ostringstream buf(std::ios::binary);
    Writer w(buf);
    buf.write(kMagic, sizeof kMagic);
    w.str(key);
    const BasisInfo& i = basis.info;
    w.pod(i.r_min);
    w.pod(std::int32_t(i.r_min_k));
    w.pod(i.x_lo);
    w.pod(i.x_max);
    w.pod(std::int32_t(i.points_per_wavelength));
    w.pod(std::uint64_t(i.grid_points));
    w.pod(i.energy_min);
    w.pod(i.energy_max);
    w.pod(std::uint8_t(i.full_line));
    w.pod(i.min_points_per_wavelength);
    w.pod(basis.potential.R);
    w.pod(basis.potential.center);
    w.pod(basis.potential.linear);
    w.vec(basis.energies);
    w.vec(basis.sturm_index);
    w.vec(basis.nodes);
    w.mat(basis.X);
    w.mat(basis.X2);
    w.mat(basis.D);
    w.mat(basis.A);
    w.pod(basis.orthonormality_residual);
    w.pod(basis.tail_ratio);
    w.pod(std::uint64_t(basis.warnings.size()));
    for (const auto& s : basis.warnings) w.str(s);
    write_text(path, buf.str());
}

std::optional<UnperturbedBasis> load_basis(const std::string& key, const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) return std::nullopt;
    char magic[sizeof kMagic];
    in.read(magic, sizeof magic);
    if (!in || !std::equal(magic, magic + sizeof magic, kMagic)) throw NumericalError("basis cache: bad header");
    Reader r(in);
    if (r.str() != key) return std::nullopt;
    UnperturbedBasis b;
    BasisInfo& i = b.info;
    i.r_min = r.pod<double>();
    i.r_min_k = r.pod<std::int32_t>();
    i.x_lo = r.pod<double>();
    i.x_max = r.pod<double>();
    i.points_per_wavelength = r.pod<std::int32_t>();
    i.grid_points = static_cast<std::size_t>(r.pod<std::uint64_t>());
    i.energy_min = r.pod<double>();
    i.energy_max = r.pod<double>();
    i.full_line = r.pod<std::uint8_t>() != 0;
    i.min_points_per_wavelength = r.pod<double>();
    b.potential.R = r.pod<double>();
    b.potential.center = r.pod<double>();
    b.potential.linear = r.pod<double>();
    b.energies = r.vec<double>();
    b.sturm_index = r.vec<int>();
    b.nodes = r.vec<int>();
    b.X = r.mat();
    b.X2 = r.mat();
    b.D = r.mat();
    b.A = r.mat();
    b.orthonormality_residual = r.pod<double>();
    b.tail_ratio = r.pod<double>();
    const auto nw = r.pod<std::uint64_t>();
    if (nw > 1000) throw NumericalError("basis cache: corrupt warning count");
    for (std::uint64_t k = 0; k < nw; ++k) b.warnings.push_back(r.str());
    const auto n = Eigen::Index(b.energies.size());
    if (b.X.rows() != n || b.X2.rows() != n || b.D.rows() != n || b.A.rows() != n)
        throw NumericalError("basis cache: inconsistent sizes");
    return b;
}

UnperturbedBasis cached_basis(const RunConfig& cfg, const std::filesystem::path& dir, bool allow_compute, bool* hit) {
    const std::string key = basis_cache_key(cfg);
    const auto path = dir / ("basis-" + key + ".bin");
    if (auto b = load_basis(key, path)) {
        if (hit) *hit = true;
        return std::move(*b);
    }
    if (hit) *hit = false;
    if (!allow_compute) throw ConfigError("no cached basis at '" + path.string() + "' and computing was disabled");
    NumericsConfig full = cfg.numerics;
    full.n_basis = 0;
    UnperturbedBasis b = solve_unperturbed(dimensionless(cfg.trap, cfg.convention), full);
    b.grid = RadialGrid{};
    b.states.resize(0, 0);
    save_basis(b, key, path);
    return b;
}

}  // namespace micromotion
