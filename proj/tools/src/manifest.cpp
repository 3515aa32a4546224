#include "manifest.hpp"

#include <array>
#include <cstdio>
#include <ctime>
#include <fstream>
#include <vector>

#include <openssl/evp.h>

#include "formulab/errors.hpp"
#include "formulab/version.hpp"

namespace formulab::cli {

std::string sha256_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot read '" + path.string() + "' for hashing");
    EVP_MD_CTX* ctx = EVP_MD_CTX_new();
    EVP_DigestInit_ex(ctx, EVP_sha256(), nullptr);
    std::array<char, 1 << 16> buf;
    while (in) {
        in.read(buf.data(), buf.size());
        if (in.gcount() > 0) EVP_DigestUpdate(ctx, buf.data(), static_cast<std::size_t>(in.gcount()));
    }
    std::array<unsigned char, EVP_MAX_MD_SIZE> md;
    unsigned int len = 0;
    EVP_DigestFinal_ex(ctx, md.data(), &len);
    EVP_MD_CTX_free(ctx);
    std::string hex;
    char pair[3];
    for (unsigned int i = 0; i < len; ++i) {
        std::snprintf(pair, sizeof pair, "%02x", md[i]);
        hex += pair;
    }
    return hex;
}

RunManifest::RunManifest(std::string command) : command_(std::move(command)) {
    const std::time_t now = std::time(nullptr);
    std::tm utc{};
    gmtime_r(&now, &utc);
    char buf[32];
    std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &utc);
    started_ = buf;
}

void RunManifest::add_artifact(const std::filesystem::path& path) {
    artifacts_[path.filename().string()] = sha256_file(path);
}

void RunManifest::close_phase() {
    if (current_phase_.empty()) return;
    timings_ms_[current_phase_] +=
        std::chrono::duration<double, std::milli>(Clock::now() - phase_start_).count();
    current_phase_.clear();
}

void RunManifest::phase(const std::string& name) {
    close_phase();
    current_phase_ = name;
    phase_start_ = Clock::now();
}

nlohmann::json RunManifest::finish(int exit_code, const std::string& error) {
    close_phase();
    timings_ms_["total"] = std::chrono::duration<double, std::milli>(Clock::now() - start_).count();
    nlohmann::json j = {{"tool", "formulab"},
                        {"version", kVersion},
                        {"command", command_},
                        {"started_at", started_},
                        {"status", exit_code == 0 ? "ok" : "error"},
                        {"exit_code", exit_code},
                        {"config", config_},
                        {"artifacts", artifacts_},
                        {"timings_ms", timings_ms_}};
    if (!error.empty()) j["error"] = error;
    for (const auto& [k, v] : extra_.items()) j[k] = v;
    return j;
}

void RunManifest::write(const std::filesystem::path& dir, int exit_code, const std::string& error) {
    const auto j = finish(exit_code, error);
    std::error_code ec;
    std::filesystem::create_directories(dir, ec);
    std::ofstream out(dir / (command_ + "_manifest.json"), std::ios::binary);
    if (out) out << j.dump(2) << '\n';
}

}  // namespace formulab::cli
