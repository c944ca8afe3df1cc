from safd import load_model
from safd.disintegration import build_gamma, convolution_check, h_rw_closed_form, h_rw_finite, sample_omega
from safd.ifs_core import format_word, shannon_entropy

model = load_model("swapped")
gamma = build_gamma(model, N=2)

for c in gamma:
    print(c.id, " ".join(format_word(w) for w in c.words), c.mass)

print("entropy", shannon_entropy(model.p))
print("h_rw (n=3)", h_rw_finite(model, gamma, 3))
print("h_rw without overlaps", h_rw_closed_form(model, gamma))

omega = sample_omega(gamma, 6, seed=1)
check = convolution_check(model, gamma, omega, n=3, samples=50_000, seed=2)
for level, direct, convolved, gap in check.levels:
    print(f"level {level:g}: {direct:.3f} vs {convolved:.3f} (gap {gap:.3f})")
print("passed" if check.passed else "failed", "sliced W1 =", check.sliced_distance)
