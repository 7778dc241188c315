"""Combine two imperfect classifiers whose mistakes rarely coincide."""
from emofuse.fusion import entropy, fuse
from emofuse.metrics import accuracy, agreement_breakdown, cohens_kappa
from emofuse.synthetic import two_branch_benchmark

truth, p_a, p_b = two_branch_benchmark()
pred_a, pred_b = p_a.argmax(1), p_b.argmax(1)
print("branch A %.4f, branch B %.4f, kappa %.3f"
      % (accuracy(pred_a, truth), accuracy(pred_b, truth), cohens_kappa(pred_a, pred_b)))

for method in ("sum_softmax", "plain_sum", "min_entropy"):
    print("%-12s %.4f" % (method, accuracy(fuse(p_a, p_b, method).choice, truth)))

rep = agreement_breakdown(pred_a, pred_b, p_a.max(1), p_b.max(1), truth)
print("agree %d, disagree %d: more confident right %d, less confident right %d, neither %d"
      % (rep.n_agree, rep.n_disagree, rep.n_higher_conf_correct, rep.n_lower_conf_correct,
         rep.n_neither_correct))

# the fused vector is much flatter than either input; only its argmax is used
q = fuse(p_a, p_b, "sum_softmax").q
print("mean entropy: A %.3f, fused %.3f" % (entropy(p_a).mean(), entropy(q).mean()))
