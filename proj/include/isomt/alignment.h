#pragma once

#include <cstddef>
#include <istream>
#include <ostream>
#include <string>
#include <vector>

#include "isomt/rng.h"

namespace isomt {

enum class UnitKind { kPhone, kSilence, kPause };

struct Unit {
  std::string symbol;
  int frames = 0;
  UnitKind kind = UnitKind::kPhone;

  bool operator==(const Unit&) const = default;
};

// Source sentence plus the forced-aligned target phones. word_boundaries holds
// the indices of the phone units that end a word, strictly increasing.
struct AlignedUtterance {
  std::string source_text;
  std::vector<Unit> units;
  std::vector<std::size_t> word_boundaries;

  bool operator==(const AlignedUtterance&) const = default;
  // Throws ValidationError on negative durations or bad boundaries.
  void Validate() const;
  int PhoneFrames() const;
  int PauseCount() const;
};

// Frame length shared by ingestion, noise and pause thresholds.
struct FrameClock {
  double frame_ms = 10.0;

  int ToFrames(double seconds) const;
  double ToSeconds(int frames) const { return frames * frame_ms / 1000.0; }
  double FramesPerSecond() const { return 1000.0 / frame_ms; }
};

// Alignment interchange format, one utterance per line:
//   source text <TAB> phone:seconds ... with "sil:seconds" for silence and
//   "|" closing each word.
std::vector<AlignedUtterance> IngestAlignment(std::istream& in, const FrameClock& clock);
std::vector<AlignedUtterance> IngestAlignmentFile(const std::string& path,
                                                  const FrameClock& clock);
void WriteAlignment(std::ostream& out, const std::vector<AlignedUtterance>& corpus,
                    const FrameClock& clock);

// Silences longer than threshold_seconds become [pause] units; shorter ones
// are removed along with their frames. Adjacent silences are merged first and
// silence at either end of the utterance is dropped.
AlignedUtterance MarkPauses(const AlignedUtterance& u, double threshold_seconds,
                            const FrameClock& clock);

struct SegmentSpec {
  std::vector<int> segment_durations;
  // Indices into AlignedUtterance::units of the [pause] units.
  std::vector<std::size_t> pause_positions;
  // True once durations have been perturbed; counters may then end nonzero.
  bool noised = false;

  bool operator==(const SegmentSpec&) const = default;
  int TotalFrames() const;
};

// Sums phone frames between pauses. Throws ValidationError when a segment is
// empty (leading, trailing or adjacent pauses) or has zero frames.
SegmentSpec ComputeSegments(const AlignedUtterance& u);

// d -> max(1, round(d + N(0, (sigma * frames_per_second)^2))) per segment.
// sigma == 0 returns the input unchanged without consuming randomness.
SegmentSpec AddNoise(const SegmentSpec& spec, double sigma_seconds,
                     const FrameClock& clock, Rng& rng);

}  // namespace isomt
