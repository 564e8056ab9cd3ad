// Small I/O utilities: CSV emission at full round-trip precision, directory
// handling, and the FNV-1a hash used for cache keys.
#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

namespace hrma {

class IoError : public std::runtime_error {
public:
    explicit IoError(const std::string& what) : std::runtime_error(what) {}
};

// 17 significant digits: doubles round-trip exactly
std::string format_full(double x);

class CsvWriter {
public:
    CsvWriter(const std::string& path, const std::vector<std::string>& header);
    void row(const std::vector<std::string>& cells);
    void close();
    ~CsvWriter();

private:
    std::string path_;
    std::string buffer_;
    bool open_ = true;
};

void ensure_directory(const std::string& dir);
void write_text_file(const std::string& path, const std::string& text);
std::string read_text_file(const std::string& path);
bool file_exists(const std::string& path);

std::uint64_t fnv1a64(const std::string& text);
std::string fnv1a64_hex(const std::string& text);

}  // namespace hrma
