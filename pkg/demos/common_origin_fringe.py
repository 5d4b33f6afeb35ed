# %% [markdown]
# # Fourth-order fringe from a common-origin source
#
# One thermal field is split in two. Each half passes through a strongly
# unbalanced interferometer, so no second-order fringe survives at either
# detector. The coincidence rate still oscillates as the short-arm delay is
# scanned: the two long-arm paths interfere with each other at fourth order.

# %%
import numpy as np

from fourthorder.harness import bundled_config_path, load_config, run_sweep

cfg = load_config(bundled_config_path("scenario_i_fringe")).with_overrides(realizations=100)
report = run_sweep(cfg, workers=2)

# %% [markdown]
# Singles stay flat within their errors while the coincidences show a
# fringe far above the noise.

# %%
singles = np.asarray(report.singles_mean)
singles_z = (singles - singles.mean()) / np.asarray(report.singles_stderr)
print("singles chi2 per point about their mean:", float(np.mean(singles_z**2)))
coinc_z = (report.mean - report.mean.mean()) / report.stderr
print("coincidence chi2 per point about their mean:", float(np.mean(coinc_z**2)))

# %% [markdown]
# A cosine fit recovers the period set by the carrier frequency.

# %%
fit = report.fit
print(f"visibility {fit.visibility:.3f} +/- {fit.visibility_err:.3f}")
print(f"period {fit.period:.5f} +/- {fit.period_err:.5f} (carrier period {2 * np.pi / 50.0:.5f})")
print("max |z| against the closed form:", report.max_abs_z)
