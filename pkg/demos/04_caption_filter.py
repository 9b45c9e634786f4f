"""
Judging captions and scoring the judge
======================================

A relevance filter asks a judge, ten captions at a time, whether each
caption shows the requested activity, and parses the numbered yes/no
reply back into per-caption verdicts. Against known ground truth the
verdicts reduce to confusion counts and the usual derived ratios.
"""

from divsat import (
    CaptionItem,
    build_filter_prompts,
    evaluate_filter,
    run_filter,
)

ACTIVITY = "climbing stairs"

captions = [
    CaptionItem(id=f"c{i}", caption=text, activity=ACTIVITY)
    for i, text in enumerate([
        "a person walks up a staircase",
        "someone climbs the stairs two at a time",
        "a figure stands still and waves",          # irrelevant
        "a person ascends stairs while holding the rail",
        "a man walks in a circle",                  # irrelevant
        "a person climbs stairs slowly",
        "someone jogs in place",                    # irrelevant
        "a person goes up the steps",
        "a person descends a ladder",               # close but wrong
        "a person climbs a short flight of stairs",
        "someone sits down on a chair",             # irrelevant
        "a person hops up the staircase",
    ])
]
truth = {c.id: "stair" in c.caption or "steps" in c.caption for c in captions}

# Prompts batch at most ten captions; twelve captions means two prompts.
prompts = build_filter_prompts(ACTIVITY, captions)
print(f"{len(captions)} captions -> {len(prompts)} prompts "
      f"(sizes {[len(p.batch) for p in prompts]})")
print("prompt 1, first numbered caption:")
print("  " + prompts[0].user_message.splitlines()[2])


class KeywordJudge:
    """Stand-in for an LLM: says yes when the caption mentions stairs.

    It deliberately mislabels ladder descents (no stairs mentioned, but
    it answers yes) so the evaluation below has something to count.
    """

    def judge(self, prompt):
        lines = []
        for i, item in enumerate(prompt.batch):
            text = item.caption
            yes = "stair" in text or "steps" in text or "ladder" in text
            lines.append(f"{i + 1}. {'yes' if yes else 'no'}")
        return "\n".join(lines)


verdicts = run_filter(ACTIVITY, captions, KeywordJudge())
kept = [v.id for v in verdicts if v.keep]
print(f"\njudge kept {len(kept)}/{len(verdicts)}: {', '.join(kept)}")

metrics = evaluate_filter(verdicts, truth)
print(f"\ntp={metrics.tp} fp={metrics.fp} fn={metrics.fn} tn={metrics.tn}")
print(f"precision {metrics.precision:.3f}   recall {metrics.recall:.3f}   "
      f"accuracy {metrics.accuracy:.3f}   f1 {metrics.f1:.3f}")
print(f"irrelevant share before filter {metrics.pct_before:.1f}%, "
      f"after filter {metrics.pct_after:.1f}%")
