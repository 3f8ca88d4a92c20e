"""Display Cube dice app: accelerometer in, digit frames out.

The node only touches HAL topics: it subscribes to the cube's
accelerometer samples and publishes DisplayFrame commands plus a face
event on /app/dice/<instance>/face whenever the detected up-face changes.
"""

from __future__ import annotations

from vtui.devices.messages import AccelSample, DisplayFrame
from vtui.examples.face import Face, face_up

# 5x7 glyphs for die values 1..6
_GLYPHS = {
    1: ("..#..", ".##..", "..#..", "..#..", "..#..", "..#..", ".###."),
    2: (".###.", "#...#", "....#", "...#.", "..#..", ".#...", "#####"),
    3: (".###.", "#...#", "....#", "..##.", "....#", "#...#", ".###."),
    4: ("...#.", "..##.", ".#.#.", "#..#.", "#####", "...#.", "...#."),
    5: ("#####", "#....", "####.", "....#", "....#", "#...#", ".###."),
    6: ("..##.", ".#...", "#....", "####.", "#...#", "#...#", ".###."),
}

WHITE = (255, 255, 255)
BLACK = (16, 16, 16)


def render_digit(
    value: int,
    width: int,
    height: int,
    fg: tuple[int, int, int] = WHITE,
    bg: tuple[int, int, int] = BLACK,
) -> bytes:
    """Nearest-neighbor scale of the 5x7 glyph onto a width x height RGB8 buffer."""
    glyph = _GLYPHS[value]
    rows, cols = len(glyph), len(glyph[0])
    out = bytearray(width * height * 3)
    for v in range(height):
        gy = min(rows - 1, v * rows // height)
        for u in range(width):
            gx = min(cols - 1, u * cols // width)
            color = fg if glyph[gy][gx] == "#" else bg
            i = (v * width + u) * 3
            out[i : i + 3] = bytes(color)
    return bytes(out)


FACE_EVENT_TAG = "FaceEvent"


class DiceAppNode:
    """Shows the current up-face value on every display of the cube."""

    def __init__(self, bus, instance: str, display_ids: list[str], display_size: tuple[int, int] = (64, 64)):
        self.node_id = f"dice:{instance}"
        self.instance = instance
        self.display_size = display_size
        self._accel_sub = bus.subscribe(
            self.node_id, f"/tui/{instance}/accel/sample", AccelSample.TYPE_TAG, 64
        )
        self._display_pubs = {
            d: bus.advertise(self.node_id, f"/tui/{instance}/{d}/cmd", DisplayFrame.TYPE_TAG)
            for d in display_ids
        }
        self._face_pub = bus.advertise(
            self.node_id, f"/app/dice/{instance}/face", FACE_EVENT_TAG
        )
        self.current_face: Face | None = None

    def pump(self, session=None) -> None:
        for env in self._accel_sub.drain():
            face = face_up(AccelSample.from_bytes(env.payload))
            if face is None or face == self.current_face:
                continue
            self.current_face = face
            value = face.dice_value
            self._face_pub.publish(f"{face.value}:{value}".encode())
            width, height = self.display_size
            pixels = render_digit(value, width, height)
            for display_id, pub in self._display_pubs.items():
                pub.publish(DisplayFrame(display_id, width, height, pixels).to_bytes())
