#pragma once

#include <chrono>
#include <filesystem>
#include <map>
#include <string>

#include <nlohmann/json.hpp>

namespace formulab::cli {

std::string sha256_file(const std::filesystem::path& path);

// Written to <output>/<command>_manifest.json on success and on failure.
class RunManifest {
public:
    explicit RunManifest(std::string command);

    void set_config(nlohmann::json config) { config_ = std::move(config); }
    void add_artifact(const std::filesystem::path& path);
    void add_extra(const std::string& key, nlohmann::json value) { extra_[key] = std::move(value); }

    // Starts a named phase; the previous phase (if any) ends here.
    void phase(const std::string& name);

    nlohmann::json finish(int exit_code, const std::string& error);
    void write(const std::filesystem::path& dir, int exit_code, const std::string& error);

private:
    using Clock = std::chrono::steady_clock;
    void close_phase();

    std::string command_;
    nlohmann::json config_ = nlohmann::json::object();
    nlohmann::json extra_ = nlohmann::json::object();
    std::map<std::string, std::string> artifacts_;
    std::map<std::string, double> timings_ms_;
    std::string started_;
    Clock::time_point start_ = Clock::now();
    std::string current_phase_;
    Clock::time_point phase_start_ = start_;
};

}  // namespace formulab::cli
