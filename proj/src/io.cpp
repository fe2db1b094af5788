#include "gd/io.hpp"

#include <cstring>
#include <fstream>
#include <istream>
#include <ostream>

namespace gd {

void write_u32le(std::ostream& out, std::uint32_t v) {
    unsigned char b[4] = {static_cast<unsigned char>(v), static_cast<unsigned char>(v >> 8),
                          static_cast<unsigned char>(v >> 16), static_cast<unsigned char>(v >> 24)};
    out.write(reinterpret_cast<const char*>(b), 4);
}

void write_u64le(std::ostream& out, std::uint64_t v) {
    unsigned char b[8];
    for (int i = 0; i < 8; ++i) b[i] = static_cast<unsigned char>(v >> (8 * i));
    out.write(reinterpret_cast<const char*>(b), 8);
}

void write_f32le(std::ostream& out, float v) {
    std::uint32_t bits;
    std::memcpy(&bits, &v, 4);
    write_u32le(out, bits);
}

static void read_exact(std::istream& in, char* buf, std::size_t n) {
    in.read(buf, static_cast<std::streamsize>(n));
    if (static_cast<std::size_t>(in.gcount()) != n)
        throw TruncatedFile("unexpected end of file");
}

std::uint32_t read_u32le(std::istream& in) {
    unsigned char b[4];
    read_exact(in, reinterpret_cast<char*>(b), 4);
    return static_cast<std::uint32_t>(b[0]) | (static_cast<std::uint32_t>(b[1]) << 8) |
           (static_cast<std::uint32_t>(b[2]) << 16) | (static_cast<std::uint32_t>(b[3]) << 24);
}

std::uint64_t read_u64le(std::istream& in) {
    unsigned char b[8];
    read_exact(in, reinterpret_cast<char*>(b), 8);
    std::uint64_t v = 0;
    for (int i = 0; i < 8; ++i) v |= static_cast<std::uint64_t>(b[i]) << (8 * i);
    return v;
}

float read_f32le(std::istream& in) {
    std::uint32_t bits = read_u32le(in);
    float v;
    std::memcpy(&v, &bits, 4);
    return v;
}

void write_magic(std::ostream& out, const char magic[4]) { out.write(magic, 4); }

void check_magic(std::istream& in, const char magic[4]) {
    char b[4];
    in.read(b, 4);
    if (in.gcount() != 4 || std::memcmp(b, magic, 4) != 0)
        throw BadMagic(std::string("expected magic ") + std::string(magic, 4));
}

void save_embeddings(const Matrix& m, std::ostream& out) {
    write_magic(out, "GDEM");
    write_u32le(out, 1);
    write_u64le(out, m.rows());
    write_u64le(out, m.cols());
    for (std::size_t i = 0; i < m.size(); ++i)
        write_f32le(out, static_cast<float>(m.data()[i]));
}

Matrix load_embeddings(std::istream& in) {
    check_magic(in, "GDEM");
    std::uint32_t version = read_u32le(in);
    if (version != 1) throw BadMagic("GDEM: unsupported version");
    std::uint64_t n = read_u64le(in);
    std::uint64_t d = read_u64le(in);
    if (n > 0 && d > (1ULL << 48) / n) throw TruncatedFile("GDEM: implausible dimensions");
    std::vector<double> data(n * d);
    for (std::size_t i = 0; i < data.size(); ++i)
        data[i] = static_cast<double>(read_f32le(in));
    return Matrix(n, d, std::move(data));
}

void save_embeddings(const Matrix& m, const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("cannot open for writing: " + path);
    save_embeddings(m, out);
    if (!out) throw IoError("write failed: " + path);
}

Matrix load_embeddings(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open for reading: " + path);
    return load_embeddings(in);
}

void save_labels(const std::vector<std::uint32_t>& labels, std::uint32_t class_count,
                 const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("cannot open for writing: " + path);
    write_magic(out, "GDLB");
    write_u32le(out, 1);
    write_u64le(out, labels.size());
    write_u32le(out, class_count);
    for (std::uint32_t v : labels) write_u32le(out, v);
    if (!out) throw IoError("write failed: " + path);
}

LoadedLabels load_labels(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open for reading: " + path);
    check_magic(in, "GDLB");
    if (read_u32le(in) != 1) throw BadMagic("GDLB: unsupported version");
    std::uint64_t n = read_u64le(in);
    LoadedLabels out;
    out.class_count = read_u32le(in);
    out.labels.resize(n);
    for (std::uint64_t i = 0; i < n; ++i) out.labels[i] = read_u32le(in);
    return out;
}

std::vector<char> read_file_bytes(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open for reading: " + path);
    return std::vector<char>(std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>());
}

void write_text_file(const std::string& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("cannot open for writing: " + path);
    out.write(text.data(), static_cast<std::streamsize>(text.size()));
    if (!out) throw IoError("write failed: " + path);
}

}  // namespace gd
