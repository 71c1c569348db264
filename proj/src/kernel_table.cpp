#include <bit>
#include <cmath>
#include <cstring>
#include <sstream>

#include "frapdesign/io_util.hpp"
#include "frapdesign/kernel.hpp"

// Binary table layout (all integers and doubles little-endian):
//   bytes 0..7   magic "FDKTBL01"
//   u32 nr, u32 nb
//   i32 beta0_q_order, i32 beta0_theta_order, i32 ode_q_order
//   f64 ode_rel_tol, f64 ode_abs_tol_scale
//   u64 creation_hash
//   f64 r_grid[nr]
//   f64 beta_grid[nb]
//   f64 values[nb*nr*nr]        (row-major [beta][r][s])
//   u64 checksum                 (FNV-1a over everything before it)

namespace frapdesign {

namespace {

constexpr char kMagic[8] = {'F', 'D', 'K', 'T', 'B', 'L', '0', '1'};

static_assert(std::endian::native == std::endian::little,
              "serialization assumes a little-endian host");

template <class T>
void append_raw(std::string& buf, T value) {
    char bytes[sizeof(T)];
    std::memcpy(bytes, &value, sizeof(T));
    buf.append(bytes, sizeof(T));
}

template <class T>
T read_raw(const std::string& buf, std::size_t& pos) {
    if (pos + sizeof(T) > buf.size()) throw std::runtime_error("kernel table file is truncated");
    T value;
    std::memcpy(&value, buf.data() + pos, sizeof(T));
    pos += sizeof(T);
    return value;
}

}  // namespace

void save_table(const KernelTable& table, const std::string& path) {
    std::string buf;
    buf.reserve(64 + table.values().size() * sizeof(double));
    buf.append(kMagic, sizeof(kMagic));
    append_raw<std::uint32_t>(buf, static_cast<std::uint32_t>(table.nr()));
    append_raw<std::uint32_t>(buf, static_cast<std::uint32_t>(table.nb()));
    const KernelTableMeta& meta = table.meta();
    append_raw<std::int32_t>(buf, meta.beta0_q_order);
    append_raw<std::int32_t>(buf, meta.beta0_theta_order);
    append_raw<std::int32_t>(buf, meta.ode_q_order);
    append_raw<double>(buf, meta.ode_rel_tol);
    append_raw<double>(buf, meta.ode_abs_tol_scale);
    append_raw<std::uint64_t>(buf, meta.creation_hash);
    for (double v : table.r_grid()) append_raw<double>(buf, v);
    for (double v : table.beta_grid()) append_raw<double>(buf, v);
    for (double v : table.values()) append_raw<double>(buf, v);
    append_raw<std::uint64_t>(buf, fnv1a64(buf.data(), buf.size()));
    atomic_write_file(path, buf);
}

KernelTable load_table(const std::string& path) {
    const std::string buf = read_file(path);
    if (buf.size() < sizeof(kMagic) + sizeof(std::uint64_t) ||
        std::memcmp(buf.data(), kMagic, sizeof(kMagic)) != 0)
        throw std::runtime_error("kernel table file is corrupt: bad magic");

    const std::uint64_t stored_sum =
        [&] {
            std::size_t pos = buf.size() - sizeof(std::uint64_t);
            return read_raw<std::uint64_t>(buf, pos);
        }();
    const std::uint64_t actual_sum = fnv1a64(buf.data(), buf.size() - sizeof(std::uint64_t));
    if (stored_sum != actual_sum)
        throw std::runtime_error("kernel table file is corrupt: checksum mismatch");

    std::size_t pos = sizeof(kMagic);
    const auto nr = read_raw<std::uint32_t>(buf, pos);
    const auto nb = read_raw<std::uint32_t>(buf, pos);
    KernelTableMeta meta;
    meta.beta0_q_order = read_raw<std::int32_t>(buf, pos);
    meta.beta0_theta_order = read_raw<std::int32_t>(buf, pos);
    meta.ode_q_order = read_raw<std::int32_t>(buf, pos);
    meta.ode_rel_tol = read_raw<double>(buf, pos);
    meta.ode_abs_tol_scale = read_raw<double>(buf, pos);
    meta.creation_hash = read_raw<std::uint64_t>(buf, pos);

    const std::size_t expected = pos + (nr + nb + static_cast<std::size_t>(nb) * nr * nr) * 8 + 8;
    if (buf.size() != expected) throw std::runtime_error("kernel table file is truncated");

    std::vector<double> r_grid(nr), beta_grid(nb);
    for (auto& v : r_grid) v = read_raw<double>(buf, pos);
    for (auto& v : beta_grid) v = read_raw<double>(buf, pos);
    std::vector<double> values(static_cast<std::size_t>(nb) * nr * nr);
    for (auto& v : values) v = read_raw<double>(buf, pos);

    KernelTable table(std::move(r_grid), std::move(beta_grid), std::move(values), meta);
    table.validate();
    return table;
}

void export_csv(const KernelTable& table, const std::string& path) {
    std::ostringstream out;
    out.precision(17);
    out << "beta,r,s,k\n";
    for (int b = 0; b < table.nb(); ++b)
        for (int i = 0; i < table.nr(); ++i)
            for (int j = 0; j < table.nr(); ++j)
                out << table.beta_grid()[b] << ',' << table.r_grid()[i] << ',' << table.r_grid()[j]
                    << ',' << table.at(b, i, j) << '\n';
    atomic_write_file(path, out.str());
}

}  // namespace frapdesign
