"""Independent reference computations the tests compare against."""

import math

import numpy as np


def brute_posterior(model, x):
    """P(y) * prod_i N(x_i; mean, var), normalised, in plain float arithmetic."""
    joint = []
    for k in range(2):
        p = float(model.prior[k])
        for xi, mu, var in zip(x, model.mean[k], model.variance[k]):
            p *= math.exp(-((xi - mu) ** 2) / (2 * var)) / math.sqrt(2 * math.pi * var)
        joint.append(p)
    total = sum(joint)
    return joint[0] / total, joint[1] / total


def count_confusion(truth, predicted):
    """Walk the pairs once, NLoS (+1) positive."""
    tp = tn = fp = fn = 0
    for t, p in zip(truth, predicted):
        if t == 1 and p == 1:
            tp += 1
        elif t == -1 and p == -1:
            tn += 1
        elif t == -1 and p == 1:
            fp += 1
        else:
            fn += 1
    return tp, tn, fp, fn


def kernel_value(model, a, b):
    a = [float(v) for v in a]
    b = [float(v) for v in b]
    if model.kernel.kind == "linear":
        return sum(x * y for x, y in zip(a, b))
    return math.exp(-model.kernel.gamma * sum((x - y) ** 2 for x, y in zip(a, b)))


def svm_margin(model, x):
    return sum(float(a) * int(m) * int(y) * kernel_value(model, sv, x)
               for sv, a, y, m in zip(model.support_vectors, model.alphas, model.labels,
                                      model.multiplicity)) + model.bias


def kkt_violations(model, X, y, tol):
    """Per-sample KKT violations (0 when satisfied) and the equality residual.

    Each training sample's multiplier is looked up from the support vector
    holding its exact (x, y); samples that are not support vectors have 0.
    """
    alpha = {}
    for sv, a, lab in zip(model.support_vectors, model.alphas, model.labels):
        alpha[(tuple(sv.tolist()), int(lab))] = float(a)
    sv_arr = model.support_vectors
    coef = model.alphas * model.multiplicity * model.labels
    if model.kernel.kind == "linear":
        f = X @ sv_arr.T @ coef + model.bias
    else:
        d2 = ((X[:, None, :] - sv_arr[None, :, :]) ** 2).sum(-1)
        f = np.exp(-model.kernel.gamma * d2) @ coef + model.bias
    viol = np.zeros(len(y))
    a_all = np.zeros(len(y))
    for i, (x, lab) in enumerate(zip(X, y)):
        a = alpha.get((tuple(x.tolist()), int(lab)), 0.0)
        a_all[i] = a
        yf = lab * f[i]
        if a == 0.0:
            viol[i] = max(0.0, (1 - tol) - yf)
        elif a >= model.c * (1 - 1e-12):
            viol[i] = max(0.0, yf - (1 + tol))
        else:
            viol[i] = max(0.0, abs(yf - 1) - tol)
    return viol, float(np.sum(a_all * y)), a_all
