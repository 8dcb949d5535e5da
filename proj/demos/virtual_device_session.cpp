// Drives the virtual stylus over the wire protocol: encode commands, feed
// the byte stream through the decoder, watch the device state evolve.

#include <cstdio>

#include "stylusfx/protocol.hpp"

int main() {
  using namespace stylusfx;
  using namespace stylusfx::proto;

  StreamDecoder decoder;
  VirtualDevice device;

  auto send = [&](const Frame& f) {
    auto bytes = encode_frame(f);
    std::printf("-> %s\n", to_hex(bytes).c_str());
    for (const Frame& got : decoder.feed(bytes)) {
      if (auto reply = device.execute(got))
        std::printf("<- %s  (%s)\n", to_hex(encode_frame(*reply)).c_str(), describe(*reply).c_str());
    }
  };

  send(make_ping());
  send(make_movement(MovementDirection::TipToEnd, 100, 50, 255, 1));
  send(make_rotation(RotationDirection::CCW, 200, 200, WaveformShape::DecreasingRamp, 3, 255));
  send(make_status());

  device.tick(150.0);
  std::printf("after 150 ms: busy=%d queued=%zu\n", device.busy(), device.queued());
  device.tick(5000.0);
  std::printf("after 5 s: busy=%d queued=%zu\n", device.busy(), device.queued());
  return 0;
}
