"""Independent numpy/scikit-image oracle for the frozen metric values in
test_metrics.cpp. Run: python3 tests/oracles/metrics_oracle.py"""

import numpy as np
from skimage.metrics import structural_similarity


def image_a(h=64, w=64):
    r, c = np.mgrid[0:h, 0:w].astype(float)
    return np.round(128 + 60 * np.sin(0.3 * r) * np.cos(0.17 * c) + 20 * ((7 * r + 13 * c) % 11) / 11)


def image_b(h=64, w=64):
    r, c = np.mgrid[0:h, 0:w].astype(float)
    return np.clip(image_a(h, w) + np.round(9 * np.sin(0.9 * r + 0.4 * c)), 0, 255)


def psnr(a, b):
    return 10 * np.log10(255.0 ** 2 / np.mean((a - b) ** 2))


def lowpass(rows, cols, cutoff, n):
    x, y = grid(rows, cols)
    radius = np.sqrt(x ** 2 + y ** 2)
    return np.fft.ifftshift(1.0 / (1.0 + (radius / cutoff) ** (2 * n)))


def grid(rows, cols):
    def rng(n):
        if n % 2:
            return np.arange(-(n - 1) / 2, (n - 1) / 2 + 1) / (n - 1)
        return np.arange(-n / 2, n / 2) / n
    return np.meshgrid(rng(cols), rng(rows))


def phasecong2(im):
    nscale, norient, min_wl, mult, sigma_onf, dtheta_on_sigma, k, eps = 4, 4, 6, 2, 0.55, 1.2, 2.0, 1e-4
    rows, cols = im.shape
    imfft = np.fft.fft2(im)
    x, y = grid(rows, cols)
    radius = np.fft.ifftshift(np.sqrt(x ** 2 + y ** 2))
    theta = np.fft.ifftshift(np.arctan2(-y, x))
    radius[0, 0] = 1
    sint, cost = np.sin(theta), np.cos(theta)
    lp = lowpass(rows, cols, 0.45, 15)
    log_gabor = []
    for s in range(nscale):
        fo = 1.0 / (min_wl * mult ** s)
        g = np.exp(-(np.log(radius / fo)) ** 2 / (2 * np.log(sigma_onf) ** 2)) * lp
        g[0, 0] = 0
        log_gabor.append(g)
    theta_sigma = np.pi / norient / dtheta_on_sigma
    energy_all = np.zeros((rows, cols))
    an_all = np.zeros((rows, cols))
    for o in range(norient):
        angl = o * np.pi / norient
        ds = sint * np.cos(angl) - cost * np.sin(angl)
        dc = cost * np.cos(angl) + sint * np.sin(angl)
        spread = np.exp(-np.abs(np.arctan2(ds, dc)) ** 2 / (2 * theta_sigma ** 2))
        sum_e = np.zeros((rows, cols)); sum_o = np.zeros((rows, cols)); sum_an = np.zeros((rows, cols))
        eo = []
        ifilt = []
        for s in range(nscale):
            filt = log_gabor[s] * spread
            ifilt.append(np.real(np.fft.ifft2(filt)) * np.sqrt(rows * cols))
            e = np.fft.ifft2(imfft * filt)
            eo.append(e)
            sum_an += np.abs(e); sum_e += e.real; sum_o += e.imag
            if s == 0:
                em_n = np.sum(filt ** 2)
        xe = np.sqrt(sum_e ** 2 + sum_o ** 2) + eps
        me, mo = sum_e / xe, sum_o / xe
        energy = np.zeros((rows, cols))
        for e in eo:
            energy += e.real * me + e.imag * mo - np.abs(e.real * mo - e.imag * me)
        mean_e2n = -np.median(np.abs(eo[0]) ** 2) / np.log(0.5)
        noise_power = mean_e2n / em_n
        an2 = sum(f ** 2 for f in ifilt)
        aiaj = sum(ifilt[i] * ifilt[j] for i in range(nscale) for j in range(i + 1, nscale))
        ne2 = 2 * noise_power * an2.sum() + 4 * noise_power * aiaj.sum()
        tau = np.sqrt(ne2 / 2)
        t = (tau * np.sqrt(np.pi / 2) + k * np.sqrt((2 - np.pi / 2) * tau ** 2)) / 1.7
        energy_all += np.maximum(energy - t, 0)
        an_all += sum_an
    return energy_all / an_all


def conv_same(im, kern):
    from scipy.signal import convolve2d
    return convolve2d(im, kern, mode="same")


def fsim(a, b):
    pc1, pc2 = phasecong2(a), phasecong2(b)
    dx = np.array([[3, 0, -3], [10, 0, -10], [3, 0, -3]]) / 16
    dy = np.array([[3, 10, 3], [0, 0, 0], [-3, -10, -3]]) / 16
    g1 = np.hypot(conv_same(a, dx), conv_same(a, dy))
    g2 = np.hypot(conv_same(b, dx), conv_same(b, dy))
    pcs = (2 * pc1 * pc2 + 0.85) / (pc1 ** 2 + pc2 ** 2 + 0.85)
    gs = (2 * g1 * g2 + 160) / (g1 ** 2 + g2 ** 2 + 160)
    pcm = np.maximum(pc1, pc2)
    return np.sum(gs * pcs * pcm) / np.sum(pcm)


if __name__ == "__main__":
    a, b = image_a(), image_b()
    s = structural_similarity(a, b, data_range=255, gaussian_weights=True, sigma=1.5,
                              use_sample_covariance=False)
    print(f"psnr {psnr(a, b):.17g}")
    print(f"ssim {s:.17g}")
    print(f"fsim {fsim(a, b):.17g}")
    a2, b2 = image_a(45, 39), image_b(45, 39)
    print(f"fsim_45x39 {fsim(a2, b2):.17g}")
    print(f"pc_sum {phasecong2(a).sum():.17g}")
