#pragma once

#include <string>
#include <vector>

#include "ccedit/pipeline.hpp"

namespace ccedit {

// One edit_clip invocation inside a long-video schedule.
struct RunPlan {
    enum class Mode { kInitial, kExtension, kInterpolation };

    Mode mode = Mode::kInitial;
    int index = 0;                        // execution order / seed offset
    std::vector<int> frame_indices;       // L+1 indices into the padded video
    std::vector<int> reference_positions; // run positions carrying references
    std::vector<int> reference_runs;      // producing run index; -1 = user-supplied
};

std::string to_string(RunPlan::Mode m);

// Keyframes every L frames; one initial keyframe run, chained extension
// runs, then interpolation runs filling the gaps. Every padded frame is
// edited by exactly one run; keyframes are reused as interpolation
// endpoints but never re-edited.
struct KeyframeSchedule {
    int N = 0;         // requested frame count
    int L = 1;         // stride; runs edit L+1 frames
    int padded_N = 0;  // N extended by repeating the last frame
    std::vector<int> keyframe_indices;
    std::vector<RunPlan> runs;
};

// Pure function of (N, L). N <= L+1 degenerates to a single initial run
// over consecutive frames; otherwise the video is padded until keyframe
// runs chain exactly ((padded_N - 1) divisible by L^2).
KeyframeSchedule plan_schedule(int N, int L);

// Dry-run export: one line per run with mode, frame indices, and reference
// provenance.
std::string format_schedule(const KeyframeSchedule& sched);

// Per-run settings shared across the whole schedule. `reference` must hold
// the externally edited initial-run center keyframe. Seeds are
// base_request.seed + run index. `workers` bounds interpolation-run
// threads; results are independent of it.
VideoClip execute_schedule(const KeyframeSchedule& sched, const VideoClip& source,
                           const EditRequest& base_request, const TridentModel& edit_model,
                           const TridentModel& interp_model, const LatentCodec& codec,
                           const NoiseSchedule& schedule, const Vocabulary& vocab,
                           int workers = 1);

}  // namespace ccedit
