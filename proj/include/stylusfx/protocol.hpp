#pragma once
// Wire protocol for commanding a stylus over any byte stream, plus a virtual
// device that executes decoded frames into actuation timelines.
//
// Frame layout (all multi-byte integers little-endian):
//
//   SYNC 0xA5 | LEN u8 | OPCODE u8 | PAYLOAD ... | CRC8
//
// LEN counts OPCODE plus payload. The CRC covers LEN through the last
// payload byte: polynomial 0x07, init 0x00, MSB-first, no reflection, no
// final XOR. The decoder is incremental and total: on a CRC mismatch or an
// illegal LEN/opcode it discards one byte and rescans for the sync marker,
// so arbitrary garbage can never wedge it.

#include <algorithm>
#include <cstdint>
#include <deque>
#include <optional>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "stylusfx/core.hpp"
#include "stylusfx/movement.hpp"
#include "stylusfx/rotation.hpp"

namespace stylusfx::proto {

inline constexpr uint8_t kSync = 0xA5;
inline constexpr size_t kMaxPayload = 32;

enum Opcode : uint8_t {
  kPing = 0x01,
  kVibe = 0x10,
  kMovement = 0x11,
  kRotation = 0x20,
  kStop = 0x2F,
  kStatus = 0x30,
  kPong = 0x81,
  kStatusReply = 0xB0,
};

/// Fixed payload size for a defined opcode, or -1 for unknown opcodes.
inline int payload_size(uint8_t opcode) {
  switch (opcode) {
    case kPing: return 0;
    case kVibe: return 4;      // ch u8, amp u8, dur_ms u16
    case kMovement: return 7;  // dir u8, d_ms u16, isoi_ms u16, amp u8, reps u8
    case kRotation: return 8;  // dir u8, on u16, off u16, shape u8, count u8, amp u8
    case kStop: return 0;
    case kStatus: return 0;
    case kPong: return 0;
    case kStatusReply: return 2;  // busy u8, queued u8
    default: return -1;
  }
}

struct Frame {
  uint8_t opcode = 0;
  std::vector<uint8_t> payload;

  bool operator==(const Frame&) const = default;
};

inline uint8_t crc8(const uint8_t* data, size_t len) {
  uint8_t crc = 0x00;
  for (size_t i = 0; i < len; ++i) {
    crc ^= data[i];
    for (int bit = 0; bit < 8; ++bit)
      crc = (crc & 0x80) ? static_cast<uint8_t>((crc << 1) ^ 0x07) : static_cast<uint8_t>(crc << 1);
  }
  return crc;
}

inline std::vector<uint8_t> encode_frame(const Frame& f) {
  int expect = payload_size(f.opcode);
  if (expect < 0) throw error("encode_frame: unknown opcode");
  if (f.payload.size() > kMaxPayload) throw error("frame too large");
  if (f.payload.size() != static_cast<size_t>(expect))
    throw error("encode_frame: payload length does not match opcode layout");
  std::vector<uint8_t> out;
  out.reserve(f.payload.size() + 4);
  out.push_back(kSync);
  out.push_back(static_cast<uint8_t>(1 + f.payload.size()));
  out.push_back(f.opcode);
  out.insert(out.end(), f.payload.begin(), f.payload.end());
  out.push_back(crc8(out.data() + 1, out.size() - 1));  // LEN..PAYLOAD
  return out;
}

namespace detail {
inline void put_u16(std::vector<uint8_t>& v, uint16_t x) {
  v.push_back(static_cast<uint8_t>(x & 0xFF));
  v.push_back(static_cast<uint8_t>(x >> 8));
}
inline uint16_t get_u16(const std::vector<uint8_t>& v, size_t at) {
  return static_cast<uint16_t>(v[at] | (v[at + 1] << 8));
}
}  // namespace detail

inline Frame make_ping() { return {kPing, {}}; }
inline Frame make_stop() { return {kStop, {}}; }
inline Frame make_status() { return {kStatus, {}}; }
inline Frame make_pong() { return {kPong, {}}; }

inline Frame make_status_reply(bool busy, uint8_t queued) {
  return {kStatusReply, {static_cast<uint8_t>(busy ? 1 : 0), queued}};
}

inline Frame make_vibe(uint8_t channel, uint8_t amp, uint16_t dur_ms) {
  Frame f{kVibe, {channel, amp}};
  detail::put_u16(f.payload, dur_ms);
  return f;
}

inline Frame make_movement(MovementDirection dir, uint16_t d_ms, uint16_t isoi_ms, uint8_t amp,
                           uint8_t reps) {
  Frame f{kMovement, {static_cast<uint8_t>(dir)}};
  detail::put_u16(f.payload, d_ms);
  detail::put_u16(f.payload, isoi_ms);
  f.payload.push_back(amp);
  f.payload.push_back(reps);
  return f;
}

inline Frame make_rotation(RotationDirection dir, uint16_t on_ms, uint16_t off_ms, WaveformShape shape,
                           uint8_t count, uint8_t amp) {
  Frame f{kRotation, {static_cast<uint8_t>(dir)}};
  detail::put_u16(f.payload, on_ms);
  detail::put_u16(f.payload, off_ms);
  f.payload.push_back(static_cast<uint8_t>(shape));
  f.payload.push_back(count);
  f.payload.push_back(amp);
  return f;
}

struct DecodeDiagnostics {
  uint64_t resyncs = 0;       // bytes discarded while hunting for a frame
  uint64_t crc_failures = 0;  // frames dropped on checksum mismatch
};

/// Incremental frame parser. Feed it byte chunks of any size; it emits every
/// complete valid frame and records diagnostics for everything else.
class StreamDecoder {
 public:
  std::vector<Frame> feed(const uint8_t* data, size_t len) {
    buf_.insert(buf_.end(), data, data + len);
    std::vector<Frame> frames;
    for (;;) {
      // Hunt for the sync marker.
      while (head_ < buf_.size() && buf_[head_] != kSync) drop_one();
      size_t avail = buf_.size() - head_;
      if (avail < 2) break;
      uint8_t len_byte = buf_[head_ + 1];
      if (len_byte < 1 || len_byte > 1 + kMaxPayload) {
        drop_one();
        continue;
      }
      if (avail >= 3) {
        int expect = payload_size(buf_[head_ + 2]);
        if (expect < 0 || static_cast<size_t>(expect) != static_cast<size_t>(len_byte) - 1) {
          drop_one();
          continue;
        }
      }
      size_t total = 2 + static_cast<size_t>(len_byte) + 1;  // SYNC LEN body CRC
      if (avail < total) break;
      if (crc8(buf_.data() + head_ + 1, 1 + len_byte) != buf_[head_ + total - 1]) {
        ++diags_.crc_failures;
        drop_one();
        continue;
      }
      Frame f;
      f.opcode = buf_[head_ + 2];
      f.payload.assign(buf_.begin() + static_cast<long>(head_) + 3,
                       buf_.begin() + static_cast<long>(head_ + total) - 1);
      frames.push_back(std::move(f));
      head_ += total;
    }
    compact();
    return frames;
  }

  std::vector<Frame> feed(const std::vector<uint8_t>& bytes) { return feed(bytes.data(), bytes.size()); }

  const DecodeDiagnostics& diagnostics() const { return diags_; }

  size_t pending_bytes() const { return buf_.size() - head_; }

 private:
  void drop_one() {
    ++head_;
    ++diags_.resyncs;
  }

  void compact() {
    if (head_ > 4096 || head_ == buf_.size()) {
      buf_.erase(buf_.begin(), buf_.begin() + static_cast<long>(head_));
      head_ = 0;
    }
  }

  std::vector<uint8_t> buf_;
  size_t head_ = 0;
  DecodeDiagnostics diags_;
};

inline std::string to_hex(const std::vector<uint8_t>& bytes) {
  static const char* digits = "0123456789ABCDEF";
  std::string out;
  for (size_t i = 0; i < bytes.size(); ++i) {
    if (i) out.push_back(' ');
    out.push_back(digits[bytes[i] >> 4]);
    out.push_back(digits[bytes[i] & 0xF]);
  }
  return out;
}

inline std::vector<uint8_t> parse_hex(const std::string& text) {
  std::vector<uint8_t> out;
  int nibble = -1;
  for (char c : text) {
    int v;
    if (c >= '0' && c <= '9') v = c - '0';
    else if (c >= 'a' && c <= 'f') v = c - 'a' + 10;
    else if (c >= 'A' && c <= 'F') v = c - 'A' + 10;
    else if (c == ' ' || c == '\t' || c == '\n' || c == '\r') {
      if (nibble >= 0) throw error("malformed hex: odd digit count");
      continue;
    } else {
      throw error(std::string("malformed hex: unexpected character '") + c + "'");
    }
    if (nibble < 0) {
      nibble = v;
    } else {
      out.push_back(static_cast<uint8_t>((nibble << 4) | v));
      nibble = -1;
    }
  }
  if (nibble >= 0) throw error("malformed hex: odd digit count");
  return out;
}

/// Human-readable one-line rendering of a decoded frame.
inline std::string describe(const Frame& f) {
  std::ostringstream os;
  switch (f.opcode) {
    case kPing: os << "PING"; break;
    case kStop: os << "STOP"; break;
    case kStatus: os << "STATUS"; break;
    case kPong: os << "PONG"; break;
    case kStatusReply:
      os << "STATUS_REPLY busy=" << int(f.payload[0]) << " queued=" << int(f.payload[1]);
      break;
    case kVibe:
      os << "VIBE ch=" << (f.payload[0] == 0 ? "tip" : "end") << " amp=" << int(f.payload[1])
         << " dur_ms=" << detail::get_u16(f.payload, 2);
      break;
    case kMovement:
      os << "MOVEMENT dir=" << (f.payload[0] == 0 ? "tip-to-end" : "end-to-tip")
         << " d_ms=" << detail::get_u16(f.payload, 1) << " isoi_ms=" << detail::get_u16(f.payload, 3)
         << " amp=" << int(f.payload[5]) << " reps=" << int(f.payload[6]);
      break;
    case kRotation:
      os << "ROTATION dir=" << (f.payload[0] == 0 ? "cw" : "ccw")
         << " on_ms=" << detail::get_u16(f.payload, 1) << " off_ms=" << detail::get_u16(f.payload, 3)
         << " shape=" << to_string(static_cast<WaveformShape>(f.payload[5]))
         << " count=" << int(f.payload[6]) << " amp=" << int(f.payload[7]);
      break;
    default: os << "UNKNOWN opcode=0x" << std::hex << int(f.opcode); break;
  }
  return os.str();
}

/// Firmware-style executor: effect frames become timelines (replacing the
/// idle slot or queueing up to depth 4, oldest queued entry dropped on
/// overflow), STOP clears everything, PING/STATUS produce replies. Playback
/// time advances only through tick().
class VirtualDevice {
 public:
  static constexpr size_t kQueueDepth = 4;

  std::optional<Frame> execute(const Frame& frame) {
    switch (frame.opcode) {
      case kPing: return make_pong();
      case kStatus: return make_status_reply(busy(), static_cast<uint8_t>(queue_.size()));
      case kStop:
        playing_.reset();
        queue_.clear();
        clock_ms_ = 0.0;
        return std::nullopt;
      case kVibe:
      case kMovement:
      case kRotation: {
        ActuationTimeline tl;
        try {
          tl = effect_timeline(frame);
        } catch (const error&) {
          ++naks_;  // malformed effect parameters: reject, state unchanged
          return std::nullopt;
        }
        load(std::move(tl));
        return std::nullopt;
      }
      default:
        ++naks_;
        return std::nullopt;
    }
  }

  /// Advances playback; finished timelines hand over to the queue.
  void tick(double delta_ms) {
    if (delta_ms < 0.0) throw error("tick: delta must be >= 0");
    while (playing_ && delta_ms > 0.0) {
      double remaining = playing_->total_duration_ms - clock_ms_;
      double step = std::min(delta_ms, remaining);
      clock_ms_ += step;
      delta_ms -= step;
      if (clock_ms_ >= playing_->total_duration_ms) advance();
    }
  }

  bool busy() const { return playing_ && clock_ms_ < playing_->total_duration_ms; }
  size_t queued() const { return queue_.size(); }
  double clock_ms() const { return clock_ms_; }
  const ActuationTimeline* current() const { return playing_ ? &*playing_ : nullptr; }
  uint64_t nak_count() const { return naks_; }

  /// Timeline a well-formed effect frame executes to; identical to calling
  /// the effect scheduler directly with the same parameters (amp maps to
  /// amplitude/255).
  static ActuationTimeline effect_timeline(const Frame& f) {
    int expect = payload_size(f.opcode);
    if (expect < 0 || f.payload.size() != static_cast<size_t>(expect))
      throw error("effect frame has malformed payload");
    switch (f.opcode) {
      case kVibe: {
        if (f.payload[0] > 1) throw error("vibe: bad channel");
        Channel ch = f.payload[0] == 0 ? Channel::VibeTip : Channel::VibeEnd;
        double amp = f.payload[1] / 255.0;
        double dur = detail::get_u16(f.payload, 2);
        if (!(dur > 0.0) || !(amp > 0.0)) throw error("vibe: bad parameters");
        ActuationTimeline tl;
        tl.channel(ch).push_back({0.0, dur, amp, WaveformShape::Square, +1});
        tl.total_duration_ms = dur;
        return tl;
      }
      case kMovement: {
        if (f.payload[0] > 1) throw error("movement: bad direction");
        MovementSpec spec;
        spec.direction = f.payload[0] == 0 ? MovementDirection::TipToEnd : MovementDirection::EndToTip;
        spec.d_ms = detail::get_u16(f.payload, 1);
        spec.isoi_ms = detail::get_u16(f.payload, 3);
        spec.amplitude = f.payload[5] / 255.0;
        spec.repetitions = f.payload[6];
        return schedule_movement(spec);
      }
      case kRotation: {
        if (f.payload[0] > 1 || f.payload[5] > 2) throw error("rotation: bad enum field");
        RotationSpec spec;
        spec.direction = f.payload[0] == 0 ? RotationDirection::CW : RotationDirection::CCW;
        spec.on_ms = detail::get_u16(f.payload, 1);
        spec.off_ms = detail::get_u16(f.payload, 3);
        spec.shape = static_cast<WaveformShape>(f.payload[5]);
        spec.pulse_count = f.payload[6];
        spec.amplitude = f.payload[7] / 255.0;
        return schedule_rotation(spec);
      }
      default: throw error("not an effect frame");
    }
  }

 private:
  void load(ActuationTimeline tl) {
    if (!playing_) {
      playing_ = std::move(tl);
      clock_ms_ = 0.0;
      return;
    }
    if (queue_.size() >= kQueueDepth) queue_.pop_front();
    queue_.push_back(std::move(tl));
  }

  void advance() {
    if (queue_.empty()) {
      playing_.reset();
      clock_ms_ = 0.0;
    } else {
      playing_ = std::move(queue_.front());
      queue_.pop_front();
      clock_ms_ = 0.0;
    }
  }

  std::optional<ActuationTimeline> playing_;
  std::deque<ActuationTimeline> queue_;
  double clock_ms_ = 0.0;
  uint64_t naks_ = 0;
};

}  // namespace stylusfx::proto
