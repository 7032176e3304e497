#pragma once

#include <atomic>
#include <cstddef>
#include <exception>
#include <thread>
#include <vector>

namespace circadj {

/// Runs task(i) for every i in [0, count) on up to `workers` threads.
/// Results must be written to per-index slots by the task; the first
/// exception (lowest index) is rethrown after all threads join.
template <typename Task>
void parallel_for(std::size_t count, int workers, Task&& task) {
    if (workers <= 1 || count <= 1) {
        for (std::size_t i = 0; i < count; ++i) task(i);
        return;
    }
    std::vector<std::exception_ptr> errors(count);
    std::atomic<std::size_t> next{0};
    auto run = [&] {
        for (std::size_t i = next++; i < count; i = next++) {
            try {
                task(i);
            } catch (...) {
                errors[i] = std::current_exception();
            }
        }
    };
    const auto n_threads = std::min<std::size_t>(static_cast<std::size_t>(workers), count);
    std::vector<std::jthread> threads;
    threads.reserve(n_threads);
    for (std::size_t t = 0; t < n_threads; ++t) threads.emplace_back(run);
    threads.clear();
    for (auto& e : errors)
        if (e) std::rethrow_exception(e);
}

}  // namespace circadj
