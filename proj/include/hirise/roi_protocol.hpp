#pragma once

// Sensor <-> processor exchange for one frame. Stage 1 sends the pooled
// compressed frame up; the processor answers with box coordinates; stage 2
// sends full-resolution crops of the requested regions back up. Every message
// lands in an append-only ledger whose byte and conversion totals are the
// event-level ground truth the closed-form cost model is checked against.

#include <cstdint>
#include <string>
#include <vector>

#include "json.hpp"

#include "hirise/analog_sensor.hpp"
#include "hirise/geometry.hpp"

namespace hirise {

enum class Direction { SensorToProcessor, ProcessorToSensor };
enum class MessageKind { CompressedFrame, RoiRequest, RoiPayload };

struct MessageRecord {
    MessageKind kind = MessageKind::CompressedFrame;
    Direction direction = Direction::SensorToProcessor;
    std::int64_t bytes = 0;
    std::int64_t conversions = 0;
    std::vector<RoiBox> boxes;   // RoiRequest only
};

// Append-only message log with running totals. Sub-totals attribute the
// compressed frame to stage 1 and the ROI payload to stage 2; the request
// travels the other direction and is tracked separately.
struct TransferLedger {
    std::vector<MessageRecord> messages;
    std::vector<std::string> notes;

    std::int64_t bytes_s_to_p = 0;
    std::int64_t bytes_p_to_s = 0;
    std::int64_t total_conversions = 0;
    std::int64_t stage1_bytes_s_to_p = 0;
    std::int64_t stage2_bytes_s_to_p = 0;
    std::int64_t stage1_conversions = 0;
    std::int64_t stage2_conversions = 0;

    void append(MessageRecord record);
    void note(std::string text);
};

// Produces ROI boxes, in pooled coordinates, from the pooled digital frame.
class Detector {
public:
    virtual ~Detector() = default;
    [[nodiscard]] virtual std::vector<RoiBox> detect(const DigitalFrame& pooled) const = 0;
};

// Replays ground-truth boxes rescaled to pooled coordinates, ignoring frame
// content. Stands in for the stage-1 network so geometry and accounting can
// be tested without inference.
class OracleDetector final : public Detector {
public:
    explicit OracleDetector(std::vector<RoiBox> pooled_boxes)
        : boxes_(std::move(pooled_boxes)) {}
    [[nodiscard]] std::vector<RoiBox> detect(const DigitalFrame&) const override {
        return boxes_;
    }

private:
    std::vector<RoiBox> boxes_;
};

// Full-resolution annotations -> detector answering in pooled coordinates.
// Origin rounds down, extent rounds up, never below 1 x 1.
[[nodiscard]] OracleDetector oracle_detector(const std::vector<RoiBox>& annotations, int pool_k);

// The box-scaling rule behind oracle_detector, exposed on its own.
[[nodiscard]] RoiBox downscale_box(const RoiBox& box, int pool_k);

// Pooled coordinates back to full resolution: multiply by k, then shrink the
// extent so the box stays inside width x height. A box whose origin already
// lies outside comes back with non-positive extent; callers drop those.
[[nodiscard]] RoiBox upscale_and_clamp(const RoiBox& pooled, int pool_k, int width, int height);

// Everything observable about one simulated frame. A session holds exactly
// one CompressedFrame, at most one RoiRequest, and a RoiPayload iff a request
// was sent.
struct SessionTrace {
    TransferLedger ledger;
    std::vector<RoiBox> stage1_boxes;       // detector output, pooled coordinates
    std::vector<RoiBox> roi_boxes;          // delivered boxes, full resolution
    std::vector<DigitalFrame> roi_frames;   // delivered crops, quantized
    DigitalFrame compressed;                // stage-1 frame, quantized
};

// Pool, convert, detect, request, extract, convert, deliver. Degenerate boxes
// after upscale are dropped with a ledger note. With an empty detector answer
// the request and payload are omitted entirely.
[[nodiscard]] SessionTrace run_two_stage(const PixelArray& src, const SensorConfig& cfg,
                                         const Detector& detector);

// Conventional path: every pixel converted and shipped in one message.
[[nodiscard]] SessionTrace run_baseline(const PixelArray& src, const SensorConfig& cfg);

[[nodiscard]] nlohmann::ordered_json session_to_json(const SessionTrace& trace);

}  // namespace hirise
