#pragma once

// Small helpers shared by the test binaries: a self-cleaning temp directory
// and plain file read/write that bypass the library's own IO helpers.

#include <filesystem>
#include <fstream>
#include <random>
#include <sstream>
#include <stdexcept>
#include <string>

namespace testutil {

class TempDir {
public:
    TempDir() {
        std::random_device rd;
        std::uniform_int_distribution<unsigned long long> dist;
        std::ostringstream name;
        name << "focalize-test-" << std::hex << dist(rd);
        path_ = std::filesystem::temp_directory_path() / name.str();
        std::filesystem::create_directories(path_);
    }
    ~TempDir() {
        std::error_code ec;
        std::filesystem::remove_all(path_, ec);
    }
    TempDir(const TempDir&) = delete;
    TempDir& operator=(const TempDir&) = delete;

    const std::filesystem::path& path() const { return path_; }
    std::filesystem::path file(const std::string& name) const { return path_ / name; }

private:
    std::filesystem::path path_;
};

inline void write_text(const std::filesystem::path& path, const std::string& content) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot write " + path.string());
    out << content;
}

inline std::string read_text(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot read " + path.string());
    std::ostringstream buf;
    buf << in.rdbuf();
    return buf.str();
}

inline std::filesystem::path data_dir() {
#ifdef FOCALIZE_TEST_DATA_DIR
    return std::filesystem::path(FOCALIZE_TEST_DATA_DIR);
#else
    return std::filesystem::current_path() / "tests" / "data";
#endif
}

}  // namespace testutil
