#include "ioncavity/threading.hpp"

#include <atomic>
#include <exception>
#include <mutex>
#include <thread>
#include <vector>

#include "ioncavity/errors.hpp"

namespace ioncavity::threading {

int resolve_thread_count(int requested) {
    if (requested < 0) throw InputError("thread count must be >= 0");
    if (requested > 0) return requested;
    const unsigned hw = std::thread::hardware_concurrency();
    return hw == 0 ? 1 : static_cast<int>(hw);
}

void parallel_for(std::size_t n, int threads, const std::function<void(std::size_t)>& task) {
    const int workers = std::min<std::size_t>(
        static_cast<std::size_t>(resolve_thread_count(threads)), n == 0 ? 1 : n);

    if (workers <= 1) {
        for (std::size_t i = 0; i < n; ++i) task(i);
        return;
    }

    std::atomic<std::size_t> next{0};
    std::exception_ptr first_error;
    std::mutex error_mutex;

    auto worker = [&]() {
        for (;;) {
            const std::size_t i = next.fetch_add(1);
            if (i >= n) return;
            try {
                task(i);
            } catch (...) {
                std::lock_guard<std::mutex> lock(error_mutex);
                if (!first_error) first_error = std::current_exception();
                return;
            }
        }
    };

    std::vector<std::thread> pool;
    pool.reserve(static_cast<std::size_t>(workers));
    for (int w = 0; w < workers; ++w) pool.emplace_back(worker);
    for (auto& t : pool) t.join();

    if (first_error) std::rethrow_exception(first_error);
}

} // namespace ioncavity::threading
