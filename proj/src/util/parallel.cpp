#include "pcqa/util/parallel.hpp"

#include <atomic>
#include <mutex>

namespace pcqa {

void parallel_for(std::size_t count, unsigned jobs, const std::function<void(std::size_t)>& body) {
    if (jobs == 0) jobs = default_jobs();
    const auto workers = static_cast<std::size_t>(std::min<std::size_t>(jobs, count));
    if (workers <= 1) {
        for (std::size_t i = 0; i < count; ++i) body(i);
        return;
    }

    std::atomic<std::size_t> next{0};
    std::exception_ptr failure;
    std::mutex failure_mutex;
    auto run = [&] {
        for (;;) {
            const std::size_t i = next.fetch_add(1);
            if (i >= count) return;
            try {
                body(i);
            } catch (...) {
                std::lock_guard lock(failure_mutex);
                if (!failure) failure = std::current_exception();
                next.store(count);
                return;
            }
        }
    };

    std::vector<std::thread> pool;
    pool.reserve(workers);
    for (std::size_t w = 0; w < workers; ++w) pool.emplace_back(run);
    for (auto& t : pool) t.join();
    if (failure) std::rethrow_exception(failure);
}

double pairwise_sum(std::span<const double> values) {
    constexpr std::size_t kLeaf = 32;
    if (values.size() <= kLeaf) {
        double s = 0.0;
        for (double v : values) s += v;
        return s;
    }
    const std::size_t half = values.size() / 2;
    return pairwise_sum(values.first(half)) + pairwise_sum(values.subspan(half));
}

double deterministic_sum(std::size_t count, unsigned jobs, const std::function<double(std::size_t)>& f) {
    constexpr std::size_t kBlock = 4096;
    const std::size_t blocks = (count + kBlock - 1) / kBlock;
    std::vector<double> partial(blocks, 0.0);
    parallel_for(blocks, jobs, [&](std::size_t b) {
        const std::size_t begin = b * kBlock;
        const std::size_t end = std::min(count, begin + kBlock);
        std::vector<double> terms(end - begin);
        for (std::size_t i = begin; i < end; ++i) terms[i - begin] = f(i);
        partial[b] = pairwise_sum(terms);
    });
    return pairwise_sum(partial);
}

}  // namespace pcqa
