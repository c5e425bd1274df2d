"""Pitch, jitter, shimmer and harmonicity of synthetic voices with known perturbation.

Usage: python3 demos/voice_quality.py
"""
from adspeech.corpus import SynthSpec, synth_voice
from adspeech.features import acoustic_features

print(f"{'planted jitter':>15} {'measured':>9} {'planted shimmer':>16} {'measured':>9} {'F0':>7} {'HNR dB':>7}")
for jitter, shimmer in ((0.0, 0.0), (0.005, 0.02), (0.01, 0.04), (0.02, 0.08)):
    r = synth_voice(SynthSpec(f0=150.0, jitter_target=jitter, shimmer_target=shimmer, noise_snr_db=25.0),
                    seed=1)
    v = acoustic_features(r.clip).values
    print(f"{r.realized_jitter():15.4f} {v['jitter_loc']:9.4f} {r.realized_shimmer():16.4f} "
          f"{v['shimmer_loc']:9.4f} {10 ** v['mean_f0']:7.1f} {v['hnr_db']:7.1f}")
