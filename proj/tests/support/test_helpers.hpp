#pragma once

#include <atomic>
#include <chrono>
#include <filesystem>
#include <functional>
#include <mutex>
#include <random>
#include <string>
#include <thread>

#include <unistd.h>

#include "rbench/judger.hpp"

namespace rbench::testkit {

/// Fresh directory under the system temp dir, removed on destruction.
class TempDir {
 public:
  explicit TempDir(const std::string& tag) {
    static std::atomic<int> counter{0};
    path_ = std::filesystem::temp_directory_path() /
            ("rbench-" + tag + "-" + std::to_string(::getpid()) + "-" + std::to_string(counter++));
    std::filesystem::remove_all(path_);
    std::filesystem::create_directories(path_);
  }
  ~TempDir() {
    std::error_code ec;
    std::filesystem::remove_all(path_, ec);
  }
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;
  const std::filesystem::path& path() const { return path_; }
  std::filesystem::path operator/(const std::string& name) const { return path_ / name; }

 private:
  std::filesystem::path path_;
};

/// Wraps a backend, counting calls and the peak number in flight.
class InstrumentedBackend : public JudgeBackend {
 public:
  explicit InstrumentedBackend(std::shared_ptr<JudgeBackend> inner, std::chrono::microseconds delay = {})
      : inner_(std::move(inner)), delay_(delay) {}

  std::string complete(const JudgeRequest& request) override {
    int now = ++in_flight_;
    int peak = peak_.load();
    while (now > peak && !peak_.compare_exchange_weak(peak, now)) {
    }
    ++calls_;
    if (delay_.count() > 0) std::this_thread::sleep_for(delay_);
    std::string reply;
    try {
      reply = inner_->complete(request);
    } catch (...) {
      --in_flight_;
      throw;
    }
    --in_flight_;
    return reply;
  }

  int calls() const { return calls_.load(); }
  int peak() const { return peak_.load(); }

 private:
  std::shared_ptr<JudgeBackend> inner_;
  std::chrono::microseconds delay_;
  std::atomic<int> in_flight_{0};
  std::atomic<int> peak_{0};
  std::atomic<int> calls_{0};
};

/// Backend driven by a callback.
class ScriptedBackend : public JudgeBackend {
 public:
  explicit ScriptedBackend(std::function<std::string(const JudgeRequest&)> fn) : fn_(std::move(fn)) {}
  std::string complete(const JudgeRequest& request) override {
    std::lock_guard lock(mu_);
    return fn_(request);
  }

 private:
  std::mutex mu_;
  std::function<std::string(const JudgeRequest&)> fn_;
};

}  // namespace rbench::testkit
