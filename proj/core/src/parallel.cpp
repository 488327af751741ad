#include "perfhom/parallel.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <condition_variable>
#include <mutex>
#include <thread>
#include <vector>

namespace perfhom::par {

namespace {

int g_threads = 1;

// Minimal fork-join pool.  Workers sleep between parallel_for calls; the
// caller participates, so n threads means n-1 workers.
class Pool {
public:
    explicit Pool(int workers) {
        for (int i = 0; i < workers; ++i)
            threads_.emplace_back([this, i] { run(i); });
    }

    ~Pool() {
        {
            std::unique_lock<std::mutex> lk(m_);
            stop_ = true;
            ++epoch_;
        }
        cv_.notify_all();
        for (auto& t : threads_) t.join();
    }

    int workers() const { return static_cast<int>(threads_.size()); }

    void dispatch(const std::function<void(int)>& job) {
        {
            std::unique_lock<std::mutex> lk(m_);
            job_ = &job;
            pending_ = workers();
            ++epoch_;
        }
        cv_.notify_all();
        job(0); // caller takes slot 0
        std::unique_lock<std::mutex> lk(m_);
        done_cv_.wait(lk, [this] { return pending_ == 0; });
        job_ = nullptr;
    }

private:
    void run(int index) {
        std::uint64_t seen = 0;
        for (;;) {
            const std::function<void(int)>* job = nullptr;
            {
                std::unique_lock<std::mutex> lk(m_);
                cv_.wait(lk, [&] { return epoch_ != seen; });
                seen = epoch_;
                if (stop_) return;
                job = job_;
            }
            if (job) (*job)(index + 1);
            {
                std::unique_lock<std::mutex> lk(m_);
                if (--pending_ == 0) done_cv_.notify_all();
            }
        }
    }

    std::vector<std::thread> threads_;
    std::mutex m_;
    std::condition_variable cv_, done_cv_;
    const std::function<void(int)>* job_ = nullptr;
    std::uint64_t epoch_ = 0;
    int pending_ = 0;
    bool stop_ = false;
};

Pool* g_pool = nullptr;

void for_slots(int slots, const std::function<void(int)>& job) {
    if (slots <= 1 || !g_pool) {
        job(0);
        return;
    }
    g_pool->dispatch(job);
}

constexpr std::size_t kBlock = 4096;

// Pairwise tree over precomputed block partials; order fixed by block index.
double combine(std::vector<double>& partial) {
    std::size_t n = partial.size();
    if (n == 0) return 0.0;
    while (n > 1) {
        const std::size_t half = (n + 1) / 2;
        for (std::size_t i = 0; i + half < n; ++i)
            partial[i] += partial[i + half];
        n = half;
    }
    return partial[0];
}

template <class BlockOp>
double block_reduce(std::size_t n, BlockOp&& op) {
    const std::size_t nb = (n + kBlock - 1) / kBlock;
    std::vector<double> partial(nb, 0.0);
    const int slots = std::min<std::size_t>(g_threads, std::max<std::size_t>(nb, 1));
    for_slots(slots, [&](int slot) {
        for (std::size_t b = slot; b < nb; b += static_cast<std::size_t>(slots)) {
            const std::size_t lo = b * kBlock;
            const std::size_t hi = std::min(lo + kBlock, n);
            partial[b] = op(lo, hi);
        }
    });
    return combine(partial);
}

} // namespace

void set_threads(int n) {
    n = std::max(1, n);
    if (n == g_threads) return;
    delete g_pool;
    g_pool = nullptr;
    g_threads = n;
    if (n > 1) g_pool = new Pool(n - 1);
}

int threads() { return g_threads; }

void parallel_for(std::size_t n, const std::function<void(std::size_t, std::size_t)>& body) {
    if (n == 0) return;
    const int slots = static_cast<int>(std::min<std::size_t>(g_threads, n));
    if (slots <= 1) {
        body(0, n);
        return;
    }
    const std::size_t chunk = (n + slots - 1) / slots;
    for_slots(slots, [&](int slot) {
        const std::size_t lo = std::min(n, static_cast<std::size_t>(slot) * chunk);
        const std::size_t hi = std::min(n, lo + chunk);
        if (lo < hi) body(lo, hi);
    });
}

double dot(const double* a, const double* b, std::size_t n) {
    return block_reduce(n, [&](std::size_t lo, std::size_t hi) {
        double s = 0.0;
        for (std::size_t i = lo; i < hi; ++i) s += a[i] * b[i];
        return s;
    });
}

double sum(const double* a, std::size_t n) {
    return block_reduce(n, [&](std::size_t lo, std::size_t hi) {
        double s = 0.0;
        for (std::size_t i = lo; i < hi; ++i) s += a[i];
        return s;
    });
}

double sum_sq(const double* a, std::size_t n) {
    return block_reduce(n, [&](std::size_t lo, std::size_t hi) {
        double s = 0.0;
        for (std::size_t i = lo; i < hi; ++i) s += a[i] * a[i];
        return s;
    });
}

double max_abs(const double* a, std::size_t n) {
    const std::size_t nb = (n + kBlock - 1) / kBlock;
    std::vector<double> partial(nb, 0.0);
    const int slots = std::min<std::size_t>(g_threads, std::max<std::size_t>(nb, 1));
    for_slots(slots, [&](int slot) {
        for (std::size_t b = slot; b < nb; b += static_cast<std::size_t>(slots)) {
            const std::size_t lo = b * kBlock;
            const std::size_t hi = std::min(lo + kBlock, n);
            double m = 0.0;
            for (std::size_t i = lo; i < hi; ++i) m = std::max(m, std::fabs(a[i]));
            partial[b] = m;
        }
    });
    double m = 0.0;
    for (double p : partial) m = std::max(m, p);
    return m;
}

} // namespace perfhom::par
