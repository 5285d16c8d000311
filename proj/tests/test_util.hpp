#ifndef GLFA_TESTS_TEST_UTIL_HPP
#define GLFA_TESTS_TEST_UTIL_HPP

#include <filesystem>
#include <fstream>
#include <random>
#include <string>

namespace testutil {

// Scratch directory removed on scope exit.
struct TempDir {
    std::filesystem::path path;

    TempDir() {
        static std::mt19937_64 eng(std::random_device{}());
        path = std::filesystem::temp_directory_path() /
               ("glfa_test_" + std::to_string(eng()));
        std::filesystem::create_directories(path);
    }
    ~TempDir() {
        std::error_code ec;
        std::filesystem::remove_all(path, ec);
    }
    TempDir(const TempDir&) = delete;
    TempDir& operator=(const TempDir&) = delete;

    std::filesystem::path file(const std::string& name) const { return path / name; }
};

inline std::filesystem::path write_file(const std::filesystem::path& path,
                                        const std::string& content) {
    std::ofstream out(path);
    out << content;
    return path;
}

inline std::string read_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    return std::string(std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>());
}

inline std::filesystem::path fixture(const std::string& name) {
    return std::filesystem::path(GLFA_FIXTURE_DIR) / name;
}

}  // namespace testutil

#endif
