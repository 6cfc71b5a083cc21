#include "subheat/parallel.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <exception>
#include <mutex>
#include <thread>

namespace subheat {

unsigned resolve_workers(unsigned requested) {
    if (requested > 0) return requested;
    return std::max(1u, std::thread::hardware_concurrency());
}

void parallel_for(std::size_t n, unsigned workers, const std::function<void(std::size_t)>& body,
                  std::size_t block) {
    if (n == 0) return;
    block = std::max<std::size_t>(1, block);
    const std::size_t n_blocks = (n + block - 1) / block;
    const unsigned w = static_cast<unsigned>(std::min<std::size_t>(resolve_workers(workers), n_blocks));

    std::atomic<std::size_t> next{0};
    std::mutex err_mutex;
    std::size_t err_index = n;
    std::exception_ptr err;

    auto run = [&] {
        for (;;) {
            const std::size_t b = next.fetch_add(1);
            if (b >= n_blocks) return;
            const std::size_t lo = b * block, hi = std::min(n, lo + block);
            for (std::size_t i = lo; i < hi; ++i) {
                try {
                    body(i);
                } catch (...) {
                    std::lock_guard<std::mutex> lock(err_mutex);
                    if (i < err_index) {
                        err_index = i;
                        err = std::current_exception();
                    }
                    break;
                }
            }
        }
    };

    if (w <= 1) {
        run();
    } else {
        std::vector<std::thread> pool;
        pool.reserve(w);
        for (unsigned k = 0; k < w; ++k) pool.emplace_back(run);
        for (auto& th : pool) th.join();
    }
    if (err) std::rethrow_exception(err);
}

double pairwise_sum(const double* v, std::size_t n) {
    if (n <= 16) {
        double s = 0.0;
        for (std::size_t i = 0; i < n; ++i) s += v[i];
        return s;
    }
    const std::size_t half = n / 2;
    return pairwise_sum(v, half) + pairwise_sum(v + half, n - half);
}

std::mt19937_64 make_stream(std::initializer_list<std::uint64_t> ids) {
    std::vector<std::uint32_t> words;
    words.reserve(2 * ids.size());
    for (std::uint64_t id : ids) {
        words.push_back(static_cast<std::uint32_t>(id));
        words.push_back(static_cast<std::uint32_t>(id >> 32));
    }
    std::seed_seq seq(words.begin(), words.end());
    return std::mt19937_64(seq);
}

MeanAndError mean_and_error(const std::vector<double>& v) {
    const std::size_t n = v.size();
    if (n == 0) return {};
    const double mean = pairwise_sum(v) / static_cast<double>(n);
    if (n == 1) return {mean, 0.0};
    std::vector<double> sq(n);
    for (std::size_t i = 0; i < n; ++i) sq[i] = (v[i] - mean) * (v[i] - mean);
    const double var = pairwise_sum(sq) / static_cast<double>(n - 1);
    return {mean, std::sqrt(var / static_cast<double>(n))};
}

}  // namespace subheat
