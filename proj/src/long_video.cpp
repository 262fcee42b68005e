#include "ccedit/long_video.hpp"

#include <atomic>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <thread>

namespace ccedit {

std::string to_string(RunPlan::Mode m) {
    switch (m) {
        case RunPlan::Mode::kInitial: return "initial";
        case RunPlan::Mode::kExtension: return "extension";
        case RunPlan::Mode::kInterpolation: return "interpolation";
    }
    throw std::logic_error("unknown run mode");
}

KeyframeSchedule plan_schedule(int N, int L) {
    if (N < 2) throw std::invalid_argument("plan_schedule: N must be >= 2");
    if (L < 1) throw std::invalid_argument("plan_schedule: L must be >= 1");
    KeyframeSchedule s;
    s.N = N;
    s.L = L;
    int l = L + 1;

    if (N <= l) {
        // All frames fit in one run; no keyframe hierarchy needed.
        s.padded_N = l;
        for (int i = 0; i < s.padded_N; i += L) s.keyframe_indices.push_back(i);
        RunPlan r;
        r.mode = RunPlan::Mode::kInitial;
        r.index = 0;
        for (int i = 0; i < l; ++i) r.frame_indices.push_back(i);
        r.reference_positions = {default_reference_index(l)};
        r.reference_runs = {-1};
        s.runs.push_back(std::move(r));
        return s;
    }

    // Keyframe runs chain in groups of L keyframes, so (padded_N - 1) must
    // be a multiple of L^2.
    int block = L * L;
    int rem = (N - 1) % block;
    s.padded_N = rem == 0 ? N : N + (block - rem);
    for (int i = 0; i < s.padded_N; i += L) s.keyframe_indices.push_back(i);
    int M = static_cast<int>(s.keyframe_indices.size());
    int n_key_runs = (M - 1) / L;

    for (int e = 0; e < n_key_runs; ++e) {
        RunPlan r;
        r.mode = e == 0 ? RunPlan::Mode::kInitial : RunPlan::Mode::kExtension;
        r.index = e;
        for (int j = 0; j <= L; ++j) r.frame_indices.push_back(s.keyframe_indices[e * L + j]);
        if (e == 0) {
            r.reference_positions = {default_reference_index(l)};
            r.reference_runs = {-1};
        } else {
            r.reference_positions = {0};
            r.reference_runs = {e - 1};
        }
        s.runs.push_back(std::move(r));
    }

    // Keyframe ordinal m is edited by run 0 for m <= L, else by the
    // extension run whose tail covers it.
    auto owner = [&](int m) { return m <= L ? 0 : (m - 1) / L; };

    if (L >= 2) {
        for (int m = 0; m + 1 < M; ++m) {
            RunPlan r;
            r.mode = RunPlan::Mode::kInterpolation;
            r.index = n_key_runs + m;
            int a = s.keyframe_indices[m];
            for (int i = 0; i <= L; ++i) r.frame_indices.push_back(a + i);
            r.reference_positions = {0, L};
            r.reference_runs = {owner(m), owner(m + 1)};
            s.runs.push_back(std::move(r));
        }
    }
    return s;
}

std::string format_schedule(const KeyframeSchedule& s) {
    std::ostringstream out;
    out << "schedule N=" << s.N << " L=" << s.L << " padded_N=" << s.padded_N << "\n";
    out << "keyframes:";
    for (int k : s.keyframe_indices) out << " " << k;
    out << "\n";
    for (const auto& r : s.runs) {
        out << "run " << r.index << " mode=" << to_string(r.mode) << " frames=";
        for (size_t i = 0; i < r.frame_indices.size(); ++i)
            out << (i ? "," : "") << r.frame_indices[i];
        out << " refs=";
        for (size_t i = 0; i < r.reference_positions.size(); ++i) {
            if (i) out << ";";
            out << "pos" << r.reference_positions[i] << ":";
            if (r.reference_runs[i] < 0)
                out << "user";
            else
                out << "run" << r.reference_runs[i];
        }
        out << "\n";
    }
    return out.str();
}

VideoClip execute_schedule(const KeyframeSchedule& sched, const VideoClip& source,
                           const EditRequest& base_request, const TridentModel& edit_model,
                           const TridentModel& interp_model, const LatentCodec& codec,
                           const NoiseSchedule& schedule, const Vocabulary& vocab, int workers) {
    source.validate();
    if (source.length() != sched.N)
        throw std::invalid_argument("execute_schedule: source has " +
                                    std::to_string(source.length()) + " frames, schedule expects " +
                                    std::to_string(sched.N));
    if (base_request.reference.entries.size() != 1)
        throw std::invalid_argument(
            "execute_schedule: base request must carry exactly one edited keyframe reference");
    if (workers < 1) throw std::invalid_argument("execute_schedule: workers must be >= 1");
    int l = sched.L + 1;

    // Padded source: repeat the last frame.
    std::vector<const PixelFrame*> padded(static_cast<size_t>(sched.padded_N));
    for (int i = 0; i < sched.padded_N; ++i)
        padded[static_cast<size_t>(i)] = &source.frames[static_cast<size_t>(std::min(i, sched.N - 1))];

    std::vector<std::optional<PixelFrame>> edited(static_cast<size_t>(sched.padded_N));

    auto make_request = [&](const RunPlan& run, const AppearanceReference& ref) {
        EditRequest req = base_request;
        req.source.frames.clear();
        req.source.fps = source.fps;
        for (int fi : run.frame_indices) req.source.frames.push_back(*padded[static_cast<size_t>(fi)]);
        req.reference = ref;
        req.seed = base_request.seed + static_cast<uint64_t>(run.index);
        return req;
    };

    auto run_one = [&](const RunPlan& run) {
        AppearanceReference ref;
        for (size_t i = 0; i < run.reference_positions.size(); ++i) {
            int pos = run.reference_positions[i];
            if (run.reference_runs[i] < 0) {
                ref.entries.emplace_back(base_request.reference.entries[0].first, pos);
            } else {
                const auto& kf = edited[static_cast<size_t>(run.frame_indices[static_cast<size_t>(pos)])];
                if (!kf) throw std::logic_error("reference keyframe not yet edited");
                ref.entries.emplace_back(*kf, pos);
            }
        }
        const TridentModel& model =
            run.mode == RunPlan::Mode::kInterpolation ? interp_model : edit_model;
        EditResult res;
        try {
            res = edit_clip(make_request(run, ref), model, codec, schedule, vocab);
        } catch (const std::exception& e) {
            throw std::runtime_error("run " + std::to_string(run.index) + " (" +
                                     to_string(run.mode) + "): " + e.what());
        }
        // Positions owned by this run: extension runs skip position 0 (the
        // previous run's keyframe); interpolation runs keep only interiors.
        int lo = 0, hi = l - 1;
        if (run.mode == RunPlan::Mode::kExtension) lo = 1;
        if (run.mode == RunPlan::Mode::kInterpolation) { lo = 1; hi = l - 2; }
        for (int p = lo; p <= hi; ++p)
            edited[static_cast<size_t>(run.frame_indices[static_cast<size_t>(p)])] =
                res.edited.frames[static_cast<size_t>(p)];
    };

    // Keyframe-level runs are a chain; interpolation runs only need the
    // finished keyframes and may execute concurrently.
    std::vector<const RunPlan*> interp_runs;
    for (const auto& run : sched.runs) {
        if (run.mode == RunPlan::Mode::kInterpolation)
            interp_runs.push_back(&run);
        else
            run_one(run);
    }

    if (!interp_runs.empty()) {
        int nthreads = std::min<int>(workers, static_cast<int>(interp_runs.size()));
        if (nthreads == 1) {
            for (const auto* run : interp_runs) run_one(*run);
        } else {
            std::atomic<size_t> next{0};
            std::vector<std::exception_ptr> errs(static_cast<size_t>(nthreads));
            std::vector<std::thread> pool;
            for (int w = 0; w < nthreads; ++w) {
                pool.emplace_back([&, w] {
                    try {
                        for (size_t i = next.fetch_add(1); i < interp_runs.size();
                             i = next.fetch_add(1))
                            run_one(*interp_runs[i]);
                    } catch (...) {
                        errs[static_cast<size_t>(w)] = std::current_exception();
                    }
                });
            }
            for (auto& t : pool) t.join();
            for (auto& e : errs)
                if (e) std::rethrow_exception(e);
        }
    }

    VideoClip out;
    out.fps = source.fps;
    for (int i = 0; i < sched.N; ++i) {
        if (!edited[static_cast<size_t>(i)])
            throw std::logic_error("frame " + std::to_string(i) + " not covered by any run");
        out.frames.push_back(*edited[static_cast<size_t>(i)]);
    }
    return out;
}

}  // namespace ccedit
