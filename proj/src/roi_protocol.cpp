#include "hirise/roi_protocol.hpp"

#include <algorithm>
#include <string>
#include <utility>

namespace hirise {

namespace {

const char* direction_name(Direction d) {
    return d == Direction::SensorToProcessor ? "sensor_to_processor" : "processor_to_sensor";
}

const char* kind_name(MessageKind k) {
    switch (k) {
        case MessageKind::CompressedFrame: return "compressed_frame";
        case MessageKind::RoiRequest: return "roi_request";
        case MessageKind::RoiPayload: return "roi_payload";
    }
    return "unknown";
}

void require_pixels_in_range(const PixelArray& src, double vdd) {
    for (double v : src.data) {
        if (v < 0.0 || v > vdd) {
            throw ConfigError("pixel value " + std::to_string(v) +
                              " outside [0, vdd]; normalize the input first");
        }
    }
}

nlohmann::ordered_json boxes_to_json(const std::vector<RoiBox>& boxes) {
    auto arr = nlohmann::ordered_json::array();
    for (const auto& b : boxes) {
        arr.push_back({b.x, b.y, b.w, b.h});
    }
    return arr;
}

}  // namespace

void TransferLedger::append(MessageRecord record) {
    switch (record.kind) {
        case MessageKind::CompressedFrame:
            bytes_s_to_p += record.bytes;
            stage1_bytes_s_to_p += record.bytes;
            stage1_conversions += record.conversions;
            break;
        case MessageKind::RoiRequest:
            bytes_p_to_s += record.bytes;
            break;
        case MessageKind::RoiPayload:
            bytes_s_to_p += record.bytes;
            stage2_bytes_s_to_p += record.bytes;
            stage2_conversions += record.conversions;
            break;
    }
    total_conversions += record.conversions;
    messages.push_back(std::move(record));
}

void TransferLedger::note(std::string text) {
    notes.push_back(std::move(text));
}

RoiBox downscale_box(const RoiBox& box, int pool_k) {
    RoiBox out;
    out.x = box.x / pool_k;
    out.y = box.y / pool_k;
    out.w = std::max(1, (box.w + pool_k - 1) / pool_k);
    out.h = std::max(1, (box.h + pool_k - 1) / pool_k);
    out.class_id = box.class_id;
    return out;
}

OracleDetector oracle_detector(const std::vector<RoiBox>& annotations, int pool_k) {
    std::vector<RoiBox> pooled;
    pooled.reserve(annotations.size());
    for (const auto& b : annotations) {
        pooled.push_back(downscale_box(b, pool_k));
    }
    return OracleDetector(std::move(pooled));
}

RoiBox upscale_and_clamp(const RoiBox& pooled, int pool_k, int width, int height) {
    RoiBox out;
    out.x = pooled.x * pool_k;
    out.y = pooled.y * pool_k;
    out.w = std::min(pooled.w * pool_k, width - out.x);
    out.h = std::min(pooled.h * pool_k, height - out.y);
    out.class_id = pooled.class_id;
    return out;
}

SessionTrace run_two_stage(const PixelArray& src, const SensorConfig& cfg,
                           const Detector& detector) {
    cfg.validate();
    if (src.width != cfg.width || src.height != cfg.height) {
        throw GeometryError("pixel array does not match configured dimensions");
    }
    require_pixels_in_range(src, cfg.vdd);

    SessionTrace trace;

    const AnalogFrame pooled = pool_frame(src, cfg);
    trace.compressed = adc_convert(pooled, cfg);
    trace.ledger.append({
        .kind = MessageKind::CompressedFrame,
        .direction = Direction::SensorToProcessor,
        .bytes = bits_to_bytes(trace.compressed.conversion_count * cfg.adc_bits),
        .conversions = trace.compressed.conversion_count,
    });

    trace.stage1_boxes = detector.detect(trace.compressed);
    if (trace.stage1_boxes.empty()) {
        return trace;   // nothing to request, session ends after stage 1
    }

    const auto request_words = static_cast<std::int64_t>(trace.stage1_boxes.size()) * 4;
    trace.ledger.append({
        .kind = MessageKind::RoiRequest,
        .direction = Direction::ProcessorToSensor,
        .bytes = bits_to_bytes(request_words * cfg.word_bits),
        .conversions = 0,
        .boxes = trace.stage1_boxes,
    });

    std::int64_t payload_conversions = 0;
    for (const auto& pooled_box : trace.stage1_boxes) {
        const RoiBox full = upscale_and_clamp(pooled_box, cfg.pool_k, cfg.width, cfg.height);
        if (full.w <= 0 || full.h <= 0) {
            trace.ledger.note("dropped degenerate roi at pooled (" +
                              std::to_string(pooled_box.x) + "," +
                              std::to_string(pooled_box.y) + ")");
            continue;
        }
        const AnalogFrame crop = extract_roi(src, full);
        DigitalFrame digital = adc_convert(crop, cfg);
        payload_conversions += digital.conversion_count;
        trace.roi_boxes.push_back(full);
        trace.roi_frames.push_back(std::move(digital));
    }
    trace.ledger.append({
        .kind = MessageKind::RoiPayload,
        .direction = Direction::SensorToProcessor,
        .bytes = bits_to_bytes(payload_conversions * cfg.adc_bits),
        .conversions = payload_conversions,
    });
    return trace;
}

SessionTrace run_baseline(const PixelArray& src, const SensorConfig& cfg) {
    cfg.validate();
    if (src.width != cfg.width || src.height != cfg.height) {
        throw GeometryError("pixel array does not match configured dimensions");
    }
    require_pixels_in_range(src, cfg.vdd);

    // Every pixel through the converter; the frame itself is not retained,
    // only its accounting.
    std::int64_t conversions = 0;
    for (double v : src.data) {
        (void)quantize_code(v, cfg.vdd, cfg.adc_bits);
        ++conversions;
    }

    SessionTrace trace;
    trace.ledger.append({
        .kind = MessageKind::CompressedFrame,
        .direction = Direction::SensorToProcessor,
        .bytes = bits_to_bytes(conversions * cfg.adc_bits),
        .conversions = conversions,
    });
    return trace;
}

nlohmann::ordered_json session_to_json(const SessionTrace& trace) {
    nlohmann::ordered_json doc;
    auto messages = nlohmann::ordered_json::array();
    for (const auto& msg : trace.ledger.messages) {
        nlohmann::ordered_json m;
        m["direction"] = direction_name(msg.direction);
        m["kind"] = kind_name(msg.kind);
        m["bytes"] = msg.bytes;
        m["conversions"] = msg.conversions;
        if (!msg.boxes.empty()) {
            m["boxes"] = boxes_to_json(msg.boxes);
        }
        messages.push_back(std::move(m));
    }
    doc["messages"] = std::move(messages);
    doc["totals"] = {
        {"bytes_s_to_p", trace.ledger.bytes_s_to_p},
        {"bytes_p_to_s", trace.ledger.bytes_p_to_s},
        {"total_conversions", trace.ledger.total_conversions},
        {"stage1_bytes_s_to_p", trace.ledger.stage1_bytes_s_to_p},
        {"stage2_bytes_s_to_p", trace.ledger.stage2_bytes_s_to_p},
        {"stage1_conversions", trace.ledger.stage1_conversions},
        {"stage2_conversions", trace.ledger.stage2_conversions},
    };
    doc["stage1_boxes"] = boxes_to_json(trace.stage1_boxes);
    doc["roi_boxes"] = boxes_to_json(trace.roi_boxes);
    doc["notes"] = trace.ledger.notes;
    return doc;
}

}  // namespace hirise
