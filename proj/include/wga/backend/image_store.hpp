#pragma once

#include <filesystem>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <stdexcept>
#include <string>

#include "wga/util/atomic_file.hpp"
#include "wga/util/hash.hpp"

namespace wga::backend {

// Content-addressed image storage. Records carry only the hash; bytes
// live here. Without a directory the store is in-memory (tests, mocks).
// Copies share the same underlying state.
class ImageStore {
public:
    ImageStore() : state_(std::make_shared<State>()) {}
    explicit ImageStore(std::filesystem::path dir) : state_(std::make_shared<State>()) {
        state_->dir = std::move(dir);
        std::filesystem::create_directories(*state_->dir);
    }

    std::string put(const std::string& bytes) {
        std::string hash = util::content_hash(bytes);
        if (state_->dir) {
            auto path = *state_->dir / (hash + ".bin");
            if (!std::filesystem::exists(path)) util::atomic_write_file(path, bytes);
        } else {
            std::lock_guard lock(state_->mu);
            state_->mem[hash] = bytes;
        }
        return hash;
    }

    std::optional<std::string> get(const std::string& hash) const {
        if (state_->dir) {
            auto path = *state_->dir / (hash + ".bin");
            if (!std::filesystem::exists(path)) return std::nullopt;
            return util::read_file(path);
        }
        std::lock_guard lock(state_->mu);
        auto it = state_->mem.find(hash);
        if (it == state_->mem.end()) return std::nullopt;
        return it->second;
    }

private:
    struct State {
        std::optional<std::filesystem::path> dir;
        std::mutex mu;
        std::map<std::string, std::string> mem;
    };
    std::shared_ptr<State> state_;
};

}  // namespace wga::backend
