#pragma once
// Bounded fan-out for judge calls. A shared counting semaphore caps how
// many tasks run at once; width 1 degenerates to a plain sequential loop so
// serial and parallel runs share one code path.

#include <cstddef>
#include <exception>
#include <functional>
#include <future>
#include <semaphore>
#include <stdexcept>
#include <vector>

namespace tourrank {

class ConcurrencyLimit {
public:
    explicit ConcurrencyLimit(int width) : width_(width), slots_(width) {
        if (width < 1) throw std::invalid_argument("parallelism width must be >= 1");
    }

    int width() const { return width_; }

    class Guard {
    public:
        explicit Guard(ConcurrencyLimit& limit) : limit_(limit) { limit_.slots_.acquire(); }
        ~Guard() { limit_.slots_.release(); }
        Guard(const Guard&) = delete;
        Guard& operator=(const Guard&) = delete;

    private:
        ConcurrencyLimit& limit_;
    };

private:
    int width_;
    std::counting_semaphore<> slots_;
};

// Runs tasks[0..k) and waits for all of them. Results land in index order;
// if any task threw, the lowest-index exception is rethrown after the rest
// finished, so no task is abandoned mid-flight.
template <typename Result>
std::vector<Result> run_all(std::vector<std::function<Result()>> tasks, ConcurrencyLimit& limit) {
    std::vector<Result> results(tasks.size());
    if (limit.width() == 1) {
        for (std::size_t i = 0; i < tasks.size(); ++i) results[i] = tasks[i]();
        return results;
    }

    std::vector<std::future<void>> inflight;
    inflight.reserve(tasks.size());
    for (std::size_t i = 0; i < tasks.size(); ++i) {
        inflight.push_back(std::async(std::launch::async, [&, i] {
            ConcurrencyLimit::Guard guard(limit);
            results[i] = tasks[i]();
        }));
    }

    std::exception_ptr first_error;
    for (std::size_t i = 0; i < inflight.size(); ++i) {
        try {
            inflight[i].get();
        } catch (...) {
            if (!first_error) first_error = std::current_exception();
        }
    }
    if (first_error) std::rethrow_exception(first_error);
    return results;
}

} // namespace tourrank
