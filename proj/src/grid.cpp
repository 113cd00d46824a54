#include "reachprob/grid.hpp"

#include <cstdint>
#include <cstring>
#include <fstream>
#include <limits>

#include "reachprob/parallel.hpp"

namespace reachprob {

GridSpec::GridSpec(std::vector<AxisSpec> axes) : axes_(std::move(axes)) {
    const int n = static_cast<int>(axes_.size());
    if (n < 1 || n > kMaxDims)
        throw std::invalid_argument("GridSpec: dimension must be in [1, " +
                                    std::to_string(kMaxDims) + "]");
    spacing_.resize(axes_.size());
    inv_spacing_.resize(axes_.size());
    strides_.resize(axes_.size());
    for (int d = 0; d < n; ++d) {
        const AxisSpec& ax = axes_[static_cast<std::size_t>(d)];
        if (!(ax.lower < ax.upper))
            throw std::invalid_argument("GridSpec: axis " + std::to_string(d) +
                                        " requires lower < upper");
        if (ax.count < 2)
            throw std::invalid_argument("GridSpec: axis " + std::to_string(d) +
                                        " requires count >= 2");
        spacing_[static_cast<std::size_t>(d)] =
            (ax.upper - ax.lower) / static_cast<double>(ax.count - 1);
        inv_spacing_[static_cast<std::size_t>(d)] = 1.0 / spacing_[static_cast<std::size_t>(d)];
    }
    // Row-major, last axis fastest.
    std::size_t stride = 1;
    for (int d = n - 1; d >= 0; --d) {
        strides_[static_cast<std::size_t>(d)] = stride;
        const auto count = static_cast<std::size_t>(axes_[static_cast<std::size_t>(d)].count);
        if (stride > std::numeric_limits<std::size_t>::max() / count)
            throw std::invalid_argument("GridSpec: total point count overflows");
        stride *= count;
    }
    total_ = stride;
}

State GridSpec::point_of_index(std::span<const std::int64_t> index) const {
    if (static_cast<int>(index.size()) != ndims())
        throw std::invalid_argument("point_of_index: index size mismatch");
    State s = State::zeros(ndims());
    for (int d = 0; d < ndims(); ++d) {
        const AxisSpec& ax = axes_[static_cast<std::size_t>(d)];
        const std::int64_t i = index[static_cast<std::size_t>(d)];
        if (i < 0 || i >= ax.count)
            throw std::out_of_range("point_of_index: axis " + std::to_string(d) +
                                    " index " + std::to_string(i) + " out of range");
        s[d] = ax.lower + static_cast<double>(i) * spacing_[static_cast<std::size_t>(d)];
    }
    return s;
}

State GridSpec::point_of_flat(std::size_t flat) const {
    std::int64_t idx[kMaxDims];
    flat_to_index(flat, std::span<std::int64_t>(idx, static_cast<std::size_t>(ndims())));
    return point_of_index(std::span<const std::int64_t>(idx, static_cast<std::size_t>(ndims())));
}

void GridSpec::flat_to_index(std::size_t flat, std::span<std::int64_t> index) const {
    if (static_cast<int>(index.size()) != ndims())
        throw std::invalid_argument("flat_to_index: index size mismatch");
    if (flat >= total_)
        throw std::out_of_range("flat_to_index: flat index out of range");
    for (int d = 0; d < ndims(); ++d) {
        const std::size_t q = flat / strides_[static_cast<std::size_t>(d)];
        index[static_cast<std::size_t>(d)] = static_cast<std::int64_t>(q);
        flat -= q * strides_[static_cast<std::size_t>(d)];
    }
}

ValueField::ValueField(GridSpec spec, int time_index, std::vector<double> values)
    : spec_(std::move(spec)), time_index_(time_index), values_(std::move(values)) {
    if (time_index_ < 0)
        throw std::invalid_argument("ValueField: time_index must be non-negative");
    if (values_.size() != spec_.total_points())
        throw std::invalid_argument("ValueField: values length does not match grid");
    for (std::size_t i = 0; i < values_.size(); ++i) {
        const double v = values_[i];
        if (!(v >= 0.0 && v <= 1.0))
            throw std::domain_error("ValueField: value at flat index " + std::to_string(i) +
                                    " outside [0, 1]");
    }
}

ValueField fill(const GridSpec& spec, const std::function<double(const State&)>& f,
                int time_index, int threads) {
    std::vector<double> values(spec.total_points());
    parallel_for(spec.total_points(), threads, [&](std::size_t begin, std::size_t end) {
        for (std::size_t p = begin; p < end; ++p) {
            const double v = f(spec.point_of_flat(p));
            if (!(v >= 0.0 && v <= 1.0))
                throw std::domain_error("fill: function returned " + std::to_string(v) +
                                        " outside [0, 1]");
            values[p] = v;
        }
    });
    return ValueField(spec, time_index, std::move(values));
}

namespace {

constexpr char kMagic[4] = {'V', 'F', 'L', 'D'};
constexpr std::uint32_t kFormatVersion = 1;

void put_u32(std::string& out, std::uint32_t v) {
    for (int i = 0; i < 4; ++i) out.push_back(static_cast<char>((v >> (8 * i)) & 0xFF));
}

void put_u64(std::string& out, std::uint64_t v) {
    for (int i = 0; i < 8; ++i) out.push_back(static_cast<char>((v >> (8 * i)) & 0xFF));
}

void put_f64(std::string& out, double v) {
    std::uint64_t bits;
    std::memcpy(&bits, &v, sizeof bits);
    put_u64(out, bits);
}

class Reader {
public:
    explicit Reader(std::istream& in) : in_(in) {}

    std::uint32_t u32() {
        unsigned char b[4];
        read(b, 4);
        return static_cast<std::uint32_t>(b[0]) | (static_cast<std::uint32_t>(b[1]) << 8) |
               (static_cast<std::uint32_t>(b[2]) << 16) | (static_cast<std::uint32_t>(b[3]) << 24);
    }

    std::uint64_t u64() {
        unsigned char b[8];
        read(b, 8);
        std::uint64_t v = 0;
        for (int i = 7; i >= 0; --i) v = (v << 8) | b[i];
        return v;
    }

    double f64() {
        const std::uint64_t bits = u64();
        double v;
        std::memcpy(&v, &bits, sizeof v);
        return v;
    }

    std::uint8_t u8() {
        unsigned char b;
        read(&b, 1);
        return b;
    }

    void read(unsigned char* dst, std::size_t n) {
        in_.read(reinterpret_cast<char*>(dst), static_cast<std::streamsize>(n));
        if (static_cast<std::size_t>(in_.gcount()) != n)
            throw FormatError("value-field file truncated");
    }

    bool at_eof() {
        return in_.peek() == std::char_traits<char>::eof();
    }

private:
    std::istream& in_;
};

} // namespace

void write_field(const ValueField& field, const std::filesystem::path& path) {
    std::string buf;
    const GridSpec& g = field.spec();
    buf.reserve(24 + static_cast<std::size_t>(g.ndims()) * 25 + field.values().size() * 8);
    buf.append(kMagic, 4);
    put_u32(buf, kFormatVersion);
    put_u32(buf, static_cast<std::uint32_t>(g.ndims()));
    for (int d = 0; d < g.ndims(); ++d) {
        const AxisSpec& ax = g.axis(d);
        put_f64(buf, ax.lower);
        put_f64(buf, ax.upper);
        put_u64(buf, static_cast<std::uint64_t>(ax.count));
        buf.push_back(ax.periodic ? 1 : 0);
    }
    put_u64(buf, static_cast<std::uint64_t>(field.time_index()));
    for (double v : field.values()) put_f64(buf, v);

    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw std::runtime_error("write_field: cannot open " + path.string());
    out.write(buf.data(), static_cast<std::streamsize>(buf.size()));
    if (!out) throw std::runtime_error("write_field: write failed for " + path.string());
}

ValueField read_field(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw FormatError("read_field: cannot open " + path.string());
    Reader r(in);

    char magic[4];
    r.read(reinterpret_cast<unsigned char*>(magic), 4);
    if (std::memcmp(magic, kMagic, 4) != 0)
        throw FormatError("read_field: bad magic bytes");
    const std::uint32_t version = r.u32();
    if (version != kFormatVersion)
        throw FormatError("read_field: unsupported format version " + std::to_string(version));
    const std::uint32_t ndims = r.u32();
    if (ndims < 1 || ndims > static_cast<std::uint32_t>(kMaxDims))
        throw FormatError("read_field: dimension count " + std::to_string(ndims) +
                          " out of range");

    std::vector<AxisSpec> axes(ndims);
    for (auto& ax : axes) {
        ax.lower = r.f64();
        ax.upper = r.f64();
        const std::uint64_t count = r.u64();
        if (count < 2 || count > (1ull << 32))
            throw FormatError("read_field: axis count out of range");
        ax.count = static_cast<std::int64_t>(count);
        const std::uint8_t p = r.u8();
        if (p > 1) throw FormatError("read_field: periodic flag must be 0 or 1");
        ax.periodic = p == 1;
        if (!(ax.lower < ax.upper))
            throw FormatError("read_field: axis bounds require lower < upper");
    }

    GridSpec spec;
    try {
        spec = GridSpec(std::move(axes));
    } catch (const std::invalid_argument& e) {
        throw FormatError(std::string("read_field: ") + e.what());
    }
    if (spec.total_points() > (1ull << 31))
        throw FormatError("read_field: declared grid too large");
    const std::uint64_t time_index = r.u64();
    if (time_index > static_cast<std::uint64_t>(std::numeric_limits<int>::max()))
        throw FormatError("read_field: time index out of range");

    std::vector<double> values(spec.total_points());
    for (auto& v : values) {
        v = r.f64();
        if (!(v >= 0.0 && v <= 1.0))
            throw FormatError("read_field: value outside [0, 1]");
    }
    if (!r.at_eof())
        throw FormatError("read_field: trailing data after payload");

    return ValueField(std::move(spec), static_cast<int>(time_index), std::move(values));
}

} // namespace reachprob
