#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include "gd/matrix.hpp"

namespace gd {

// little-endian primitives
void write_u32le(std::ostream& out, std::uint32_t v);
void write_u64le(std::ostream& out, std::uint64_t v);
void write_f32le(std::ostream& out, float v);
std::uint32_t read_u32le(std::istream& in);
std::uint64_t read_u64le(std::istream& in);
float read_f32le(std::istream& in);
void write_magic(std::ostream& out, const char magic[4]);
void check_magic(std::istream& in, const char magic[4]);

// Embedding file "GDEM v1": magic GDEM, u32 version=1, u64 N, u64 D, then
// N*D float32 LE row-major. Values are stored at 32-bit precision and
// upcast to real64 on load.
void save_embeddings(const Matrix& m, const std::string& path);
Matrix load_embeddings(const std::string& path);
void save_embeddings(const Matrix& m, std::ostream& out);
Matrix load_embeddings(std::istream& in);

// Labels sidecar "GDLB v1": magic GDLB, u32 version=1, u64 N, u32
// class_count, then N u32 labels.
void save_labels(const std::vector<std::uint32_t>& labels, std::uint32_t class_count,
                 const std::string& path);
struct LoadedLabels {
    std::vector<std::uint32_t> labels;
    std::uint32_t class_count;
};
LoadedLabels load_labels(const std::string& path);

std::vector<char> read_file_bytes(const std::string& path);
void write_text_file(const std::string& path, const std::string& text);

}  // namespace gd
