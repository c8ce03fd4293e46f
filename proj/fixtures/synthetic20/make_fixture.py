"""Regenerates the bundled 20-record fixture (manifest + tiny PNG memes)."""
import json
import pathlib
import random

from PIL import Image, ImageDraw

HERE = pathlib.Path(__file__).parent
LABELS = ["Not propaganda", "Propaganda", "Not-meme", "Other"]
# split -> label per record; train mirrors the ArMeme skew
PLAN = {
    "train": [0, 0, 0, 0, 0, 0, 1, 1, 1, 2, 3, 0],
    "dev": [0, 1, 0, 2],
    "test": [0, 1, 0, 3],
}
TEXTS = [
    "عندما تنتظر الراتب آخر الشهر",
    "الحكومة تعدكم بمستقبل أفضل للجميع",
    "صباح الخير يا جماعة",
    "قاطعوا المنتجات الآن قبل فوات الأوان",
    "when the wifi finally connects",
    "only the party can save the nation",
    "",
    "كل عام وأنتم بخير",
    "this leader never lies to you",
    "weekend plans: sleep",
]


def main() -> None:
    rng = random.Random(20)
    (HERE / "images").mkdir(exist_ok=True)
    rows = []
    n = 0
    for split, plan in PLAN.items():
        for label_index in plan:
            n += 1
            rid = f"syn-{n:02d}"
            img = f"images/{rid}.png"
            colour = tuple(rng.randrange(256) for _ in range(3))
            im = Image.new("RGB", (32, 32), colour)
            ImageDraw.Draw(im).rectangle([4, 4, 4 + label_index * 6, 12], fill=(255, 255, 255))
            im.save(HERE / img)
            rows.append({
                "id": rid,
                "img_path": img,
                "text": TEXTS[n % len(TEXTS)],
                "class_label": LABELS[label_index],
                "split": split,
            })
    with open(HERE / "manifest.jsonl", "w", encoding="utf-8") as f:
        for row in rows:
            f.write(json.dumps(row, ensure_ascii=False) + "\n")


if __name__ == "__main__":
    main()
