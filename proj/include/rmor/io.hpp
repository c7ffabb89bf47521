#pragma once
//
// Snapshot persistence and CSV helpers.
//
// Binary snapshot layout (all integers and floats little-endian):
//
//   "RMOR1"                         5 bytes magic
//   u64 n, u64 m, u64 flags         flags bits 0..31 = stamp width w, others zero
//   f64[n*m]                        data, column-major
//   f64[w*m]                        stamps, one w-tuple per snapshot
//   f64[m]                          weights
//
// Matrix CSV: a header line "n=<rows>,m=<cols>" followed by one line per row.
//

#include <array>
#include <bit>
#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iterator>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include "rmor/errors.hpp"
#include "rmor/linalg.hpp"
#include "rmor/pod.hpp"

namespace rmor {

inline constexpr std::string_view snapshot_magic = "RMOR1";

namespace detail {

inline void put_u64(std::string& buf, std::uint64_t v)
{
    for (int i = 0; i < 8; ++i)
        buf.push_back(static_cast< char >((v >> (8 * i)) & 0xffu));
}

inline void put_f64(std::string& buf, double x)
{
    put_u64(buf, std::bit_cast< std::uint64_t >(x));
}

class ByteReader
{
public:
    explicit ByteReader(std::string_view bytes) : bytes_(bytes) {}

    std::uint64_t u64(const char* field)
    {
        need(8, field);
        std::uint64_t v = 0;
        for (int i = 0; i < 8; ++i)
            v |= static_cast< std::uint64_t >(static_cast< unsigned char >(bytes_[pos_ + i])) << (8 * i);
        pos_ += 8;
        return v;
    }

    double f64(const char* field) { return std::bit_cast< double >(u64(field)); }

    std::string_view take(std::size_t count, const char* field)
    {
        need(count, field);
        auto out = bytes_.substr(pos_, count);
        pos_ += count;
        return out;
    }

    std::size_t offset() const { return pos_; }
    std::size_t remaining() const { return bytes_.size() - pos_; }

private:
    void need(std::size_t count, const char* field) const
    {
        if (bytes_.size() - pos_ < count)
            throw ParseError(std::string("snapshot file truncated while reading ") + field, bytes_.size());
    }

    std::string_view bytes_;
    std::size_t      pos_ = 0;
};

inline std::string read_file(const std::filesystem::path& path)
{
    std::ifstream in(path, std::ios::binary);
    if (!in)
        throw Error("cannot open " + path.string());
    return std::string(std::istreambuf_iterator< char >(in), std::istreambuf_iterator< char >());
}

/// write to a sibling temporary and rename, so readers never see a partial file
inline void write_file_atomic(const std::filesystem::path& path, const std::string& contents)
{
    const auto tmp = std::filesystem::path(path.string() + ".tmp");
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out)
            throw Error("cannot write " + tmp.string());
        out.write(contents.data(), static_cast< std::streamsize >(contents.size()));
        if (!out)
            throw Error("write failed for " + tmp.string());
    }
    std::filesystem::rename(tmp, path);
}

inline std::string format_double(double x)
{
    std::array< char, 32 > buf{};
    std::snprintf(buf.data(), buf.size(), "%.17g", x);
    return buf.data();
}

inline std::vector< std::string > split(std::string_view line, char sep = ',')
{
    std::vector< std::string > out;
    std::size_t                start = 0;
    while (true)
    {
        const auto pos = line.find(sep, start);
        out.emplace_back(line.substr(start, pos == std::string_view::npos ? std::string_view::npos : pos - start));
        if (pos == std::string_view::npos)
            break;
        start = pos + 1;
    }
    return out;
}

inline double parse_double(const std::string& s, std::size_t line_no)
{
    try
    {
        std::size_t used = 0;
        const double v   = std::stod(s, &used);
        if (used != s.size())
            throw std::invalid_argument(s);
        return v;
    }
    catch (const std::exception&)
    {
        throw FormatError("line " + std::to_string(line_no) + ": not a number: '" + s + "'");
    }
}

} // namespace detail

inline std::string encode_snapshots(const SnapshotMatrix& snap)
{
    const auto n = static_cast< std::uint64_t >(snap.rows());
    const auto m = static_cast< std::uint64_t >(snap.cols());
    const auto w = static_cast< std::uint64_t >(snap.stamps().rows());

    std::string buf;
    buf.reserve(5 + 24 + 8 * (n * m + w * m + m));
    buf.append(snapshot_magic);
    detail::put_u64(buf, n);
    detail::put_u64(buf, m);
    detail::put_u64(buf, w & 0xffffffffu);

    const DenseMatrix& data = snap.data();
    for (Index j = 0; j < data.cols(); ++j)
        for (Index i = 0; i < data.rows(); ++i)
            detail::put_f64(buf, data(i, j));
    for (Index j = 0; j < snap.stamps().cols(); ++j)
        for (Index i = 0; i < snap.stamps().rows(); ++i)
            detail::put_f64(buf, snap.stamps()(i, j));
    for (Index j = 0; j < snap.weights().size(); ++j)
        detail::put_f64(buf, snap.weights()(j));
    return buf;
}

inline SnapshotMatrix decode_snapshots(std::string_view bytes)
{
    detail::ByteReader in(bytes);

    const auto magic = in.take(snapshot_magic.size(), "magic");
    if (magic != snapshot_magic)
        throw ParseError("bad magic bytes, not an RMOR1 snapshot file", 0);

    const std::uint64_t n     = in.u64("row count");
    const std::uint64_t m     = in.u64("column count");
    const std::uint64_t flags = in.u64("flags");

    if (flags >> 32 != 0)
        throw FormatError("snapshot header: reserved flag bits are set");
    const std::uint64_t w = flags & 0xffffffffu;

    // guard against sizes that overflow before comparing with the payload
    constexpr std::uint64_t max_entries = (std::uint64_t{ 1 } << 58);
    if (n > max_entries || m > max_entries || (m != 0 && n > max_entries / m) || (m != 0 && w > max_entries / m))
        throw FormatError("snapshot header: shape " + std::to_string(n) + "x" + std::to_string(m) +
                          " is not representable");

    const std::uint64_t payload = 8 * (n * m + w * m + m);
    if (in.remaining() > payload)
        throw FormatError("snapshot file: " + std::to_string(in.remaining() - payload) +
                          " trailing bytes after the declared " + std::to_string(n) + "x" +
                          std::to_string(m) + " payload");

    DenseMatrix data(static_cast< Index >(n), static_cast< Index >(m));
    for (Index j = 0; j < data.cols(); ++j)
        for (Index i = 0; i < data.rows(); ++i)
            data(i, j) = in.f64("data");

    DenseMatrix stamps(static_cast< Index >(w), static_cast< Index >(m));
    for (Index j = 0; j < stamps.cols(); ++j)
        for (Index i = 0; i < stamps.rows(); ++i)
            stamps(i, j) = in.f64("stamps");

    Vector weights(static_cast< Index >(m));
    for (Index j = 0; j < weights.size(); ++j)
        weights(j) = in.f64("weights");

    try
    {
        return SnapshotMatrix(std::move(data), std::move(stamps), std::move(weights));
    }
    catch (const InvalidInputError& e)
    {
        throw FormatError(std::string("snapshot file: ") + e.what());
    }
}

inline void save_snapshots(const std::filesystem::path& path, const SnapshotMatrix& snap)
{
    detail::write_file_atomic(path, encode_snapshots(snap));
}

inline SnapshotMatrix load_snapshots(const std::filesystem::path& path)
{
    return decode_snapshots(detail::read_file(path));
}

// -------------------------------------------------------------------------
// CSV
// -------------------------------------------------------------------------

inline std::string matrix_to_csv(const DenseMatrix& A)
{
    std::string out = "n=" + std::to_string(A.rows()) + ",m=" + std::to_string(A.cols()) + "\n";
    for (Index i = 0; i < A.rows(); ++i)
    {
        for (Index j = 0; j < A.cols(); ++j)
        {
            if (j)
                out.push_back(',');
            out += detail::format_double(A(i, j));
        }
        out.push_back('\n');
    }
    return out;
}

inline DenseMatrix matrix_from_csv(const std::string& text)
{
    std::istringstream in(text);
    std::string        line;
    if (!std::getline(in, line))
        throw FormatError("matrix csv: missing header");

    long long rows = -1, cols = -1;
    if (std::sscanf(line.c_str(), "n=%lld,m=%lld", &rows, &cols) != 2 || rows < 0 || cols < 0)
        throw FormatError("matrix csv: header must read n=<rows>,m=<cols>");

    DenseMatrix A(rows, cols);
    for (long long i = 0; i < rows; ++i)
    {
        if (!std::getline(in, line))
            throw FormatError("matrix csv: expected " + std::to_string(rows) + " rows, got " + std::to_string(i));
        const auto fields = detail::split(line);
        if (static_cast< long long >(fields.size()) != cols)
            throw FormatError("matrix csv: row " + std::to_string(i) + " has " + std::to_string(fields.size()) +
                              " fields, expected " + std::to_string(cols));
        for (long long j = 0; j < cols; ++j)
            A(i, j) = detail::parse_double(fields[static_cast< std::size_t >(j)], static_cast< std::size_t >(i + 2));
    }
    while (std::getline(in, line))
        if (!line.empty())
            throw FormatError("matrix csv: trailing data after " + std::to_string(rows) + " rows");
    return A;
}

inline void write_matrix_csv(const std::filesystem::path& path, const DenseMatrix& A)
{
    detail::write_file_atomic(path, matrix_to_csv(A));
}

inline DenseMatrix read_matrix_csv(const std::filesystem::path& path)
{
    return matrix_from_csv(detail::read_file(path));
}

/// Header row plus string cells; every row must have as many cells as the header.
struct CsvTable
{
    std::vector< std::string >                header;
    std::vector< std::vector< std::string > > rows;
};

inline CsvTable parse_csv_table(const std::string& text)
{
    std::istringstream in(text);
    std::string        line;
    CsvTable           table;
    if (!std::getline(in, line))
        throw FormatError("csv: empty input");
    table.header = detail::split(line);

    std::size_t line_no = 1;
    while (std::getline(in, line))
    {
        ++line_no;
        if (line.empty())
            continue;
        auto cells = detail::split(line);
        if (cells.size() != table.header.size())
            throw FormatError("csv line " + std::to_string(line_no) + ": " + std::to_string(cells.size()) +
                              " cells, header has " + std::to_string(table.header.size()));
        table.rows.push_back(std::move(cells));
    }
    return table;
}

inline std::string csv_escape(std::string s)
{
    for (auto& c : s)
        if (c == ',' || c == '\n' || c == '\r')
            c = ';';
    return s;
}

} // namespace rmor
