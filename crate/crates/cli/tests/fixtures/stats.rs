// Reference values from scipy.stats (ttest_ind with equal_var=False, shapiro).

/// (a, b, t, dof, two-sided p)
pub const WELCH: [(&[f64], &[f64], f64, f64, f64); 20] = [
    (&[1.051, 3.504, 1.079, 1.878, 1.582, 1.867, 2.036, 3.153, 2.431, 1.453, 2.87, 2.72, 1.317, 2.451, 2.525, 2.445, 2.253, 0.716, 1.495, 1.927, 0.689, 1.83, 1.987, 3.244, 3.938, 0.069, 1.2, 0.786, 1.437, 0.382, 1.272, 1.519, 0.788, 1.574, 1.226, 0.346, 2.654], &[0.074, -0.537, -1.488, -0.522, -0.573, -1.724, -0.303, -2.175, 1.955, -1.67, 1.136, 2.84, -2.999, -0.919, 2.371, -1.743, -2.279, 1.637, -3.651, 0.429, 1.77, -2.504, -1.05, -2.218, -2.274, 3.441, 1.354], 5.5195314091149035, 34.74851068717216, 3.394936921847255e-06),
    (&[2.883, 4.747, -1.333, -2.258, 0.784, -0.492, -0.455, 2.637, -4.477, -0.61, 1.133, -1.337, 3.563, -0.971, -4.003, 3.006, 0.876, -3.56, 2.884, 3.17, 0.736, 4.627, 4.832, 0.47, 0.825, 3.888, -1.031, 2.701, 2.791, -2.139, 6.473, 0.416, 0.75, 0.858, 3.613], &[-0.061, -1.023, -1.391, -0.099, -0.64, -0.684, 0.712, 0.3, -1.774, 0.338, 1.601, -0.79, -0.373, -0.321], 2.621001788959226, 46.026925518063514, 0.011840938906942126),
    (&[-1.201, -1.422, 0.031, -2.52, -0.003, -1.967, 0.009, -1.132, -0.321, -2.243, -2.184, -1.29, 0.525, -2.783, -2.046, -0.426, -2.095, -1.85, -2.197, -1.924, -1.308, -1.369, 0.228, -1.387, -1.909, -2.046, 0.104], &[0.573, 0.778, 1.456, 1.651, 0.167, 0.634, -1.722, -0.772, -1.476, -1.256, 0.593, -0.567, 1.231, 0.602, 0.551, -0.188, -0.188, 1.732, 0.57, 1.227, 2.757, 1.775, 0.98, -0.701, 0.926, 0.666, -0.801, -1.054, 1.997], -6.110386535863024, 53.616781128063145, 1.1613842925315958e-07),
    (&[3.818, 5.56, -0.014, 1.33, 0.71, -0.612, 2.425, 0.279, 3.024, 4.327, -3.005, -2.927, 3.703, 2.522, 0.811, 2.443, 0.227, 2.667, -3.167, 2.747, 1.728, -1.67, 2.449, 1.382, 7.516, 4.912, 2.721, 2.589, 2.427, 4.279, 0.528, 1.898, 1.289, -2.162, 5.018, 1.41, 4.649, 4.271], &[2.659, 2.267, -2.117], 0.6074975760589871, 2.2806538812520967, 0.598536903868074),
    (&[0.173, 0.455, -0.264, -0.67, -1.845, -2.108], &[1.728, 1.615, 1.143, 3.163, 1.103, 0.994, 0.635, 1.316, 1.979, 2.623, 2.417, 2.325, 1.452, 2.044, 0.898, 1.963, 1.877, 1.773, 1.154, 1.452, 0.727, 1.511, 1.653, 1.805, 1.883, 1.214, 1.066, 0.939, 1.536, 2.13, 2.5, 1.332, 1.326, 1.206, 2.255, 2.012, 2.163, 2.127], -5.369831675651586, 5.4707557027799565, 0.0022876155338014273),
    (&[-0.039, -1.91, 0.287, -0.142, 1.16, 0.928, 1.253, -1.242, 0.402, -0.772, 0.061, -1.111, 0.142, 0.555], &[2.815, 0.787, 2.862, -1.05, 0.177, 4.493, 2.023, -2.441, 0.766, 1.397, -1.441, 1.644, 0.853, 1.314, 2.648, -2.817, 0.985, 0.102, 0.393, 0.852, 1.531, 3.042, -2.774, 0.152, 2.257, 0.872, 0.893, 1.642, 1.52, 2.692], -2.411432495668153, 40.87128417972781, 0.020468935219325975),
    (&[-0.22, -1.087, -1.265, -0.802, -0.263, 0.097, 1.341, 0.838, 0.05, -1.43, -1.714, -1.206, -1.379, 0.842, -0.113, 0.243, -0.427, -1.092, -0.484, -0.051, -2.377, -1.812, -2.687, -2.452, 1.38, -0.871, 0.159, -1.804, 0.23, -1.469, -3.453, -1.818, 0.707, -2.031], &[1.208, 1.456, 1.81, 1.45, 1.601, 1.751, 1.798, 1.408, 1.778, 2.294, 1.008, 2.636, 1.513, 1.383, 0.872, 1.242, 1.98, 1.744, 1.462, 2.01, 1.553, 1.422, 1.154, 2.003, 1.433, 1.916, 2.486, 1.415, 1.363, 1.842, 1.509, 2.433, 1.909, 1.486, 2.149, 2.058, 1.526, 1.948, 2.404], -11.59397127301271, 39.955835137993674, 2.3330154199150634e-14),
    (&[3.239, 4.584, 3.165], &[-1.424, -0.742, -1.823, -1.067, -1.354, -1.745, -0.979, -1.623, -1.045, -0.943, -1.36, -1.998, -1.77, -1.75, -1.145, -1.39, -1.124, -1.25, -1.275, -1.725, -1.493, -1.006, -1.419, -1.312, -1.028, -1.035, -1.228, -1.887, -2.251, -1.033], 10.809829838539772, 2.0842386471634256, 0.0073050419321571145),
    (&[-1.642, -2.974, -1.704, -2.46, -1.906, -2.998, -2.242, -2.139, -2.731, -1.09, -2.201, -1.308, -2.959, -2.499, -1.778, -1.912, -1.018, -1.956, -1.444, -2.975, -2.147, -2.925, -2.95, -2.11, -2.559, -1.48], &[-2.495, -1.156, -2.303, -2.456, -2.135, -2.235, -1.036, -3.041, -0.825, -2.674, -0.858, -0.613, -0.4, -4.002, -2.985, -1.044, -1.556, -0.734, -1.454, -2.138, -3.713], -1.010628322050495, 30.958567159978113, 0.3200283779025413),
    (&[-0.516, -2.53, -1.922, -2.465, -0.506, -2.15, -3.007, -0.62, -1.866, -2.887, -3.375, -3.49, -2.194, -1.022, 0.527, 0.658, -1.586, 0.223, -0.606, -0.955, -1.036, 0.948, -1.282, 0.816, -2.217, -1.956, -3.627, -1.4, -0.402, -1.921, -2.144, -0.292, -0.583, -2.229, -2.264, -0.172, -2.162, -3.099], &[-2.733, -1.084, -0.456, 0.845, -0.994, -0.501, -2.269, -2.025, -1.38, -0.894, -1.191, -0.696, -1.477, -0.696, -1.132, -2.967, -2.025, -1.246, -1.972, -1.025, -2.396, -1.705, -2.325, -2.414, -2.406, -0.999, -0.556, -1.427, -2.197, -0.19, -3.01, -0.582, -1.745, -3.339, -1.33], 0.17911664645918962, 67.69623214549078, 0.8583811237541858),
    (&[3.817, 2.948, -0.419, -1.93, -1.403, -3.535, -1.799, -2.145, -0.396, -1.622, -2.376, 0.081, -2.588, 0.668, -8.404, 1.723, 1.005, -4.407, 2.022, 1.708, -3.884, -0.302], &[-0.192, -1.632, -0.438, 1.268, 2.987, -0.879, 2.08, 0.774, -0.062, -1.537, -4.142, -0.264, 2.621, -2.296, 1.592, -1.14, -2.294, -3.515, 0.965, -1.978, 1.516, -1.287, -0.481, 0.844, 3.26, -0.252, -1.006, 0.682, 1.651, 0.529, -1.29, 1.039, -2.603, -1.796, 2.353, 0.839, 0.342, 0.106], -1.3255606261023594, 31.144376261971548, 0.19462703103965914),
    (&[-2.015, -1.358, -2.891, -0.766, 0.698, -4.881, -1.615, -0.448, -0.723, -2.897, -0.421, -3.414, -1.547, -0.808, -4.116, -2.042, -0.383, -0.508, -0.665, -0.904, -1.016, -2.006, -0.853, -1.676, 1.015, 0.198, -4.2, -3.827, 0.157, -2.67, -3.899, -1.527, -1.328], &[-4.834, -4.103, -1.598, -3.498, -3.178, -2.226, -2.331, -2.305, -1.788, -1.845, -3.933, 0.088, -3.316, 0.706, -1.2, -0.842, -4.758, -3.08, -2.992, -0.758, -3.279, -3.856, -1.294, -1.519, -1.855], 1.9890211900737105, 52.81238313713813, 0.05189025255268923),
    (&[2.789, -3.831, -3.981, 0.255, 3.324, -4.797, 0.257, 1.051, 0.402, 0.045, 2.696, -0.839, -2.863], &[-0.345, -2.981, 2.311, -3.447, -0.066, 3.236, -0.68, 4.084, -0.425, 7.002, 0.412, -0.551, -0.834, -0.229, -0.513, -1.124, -4.008, -4.651, 0.958, -2.456], -0.21192516887849164, 26.4920357334929, 0.8337874479964487),
    (&[-0.314, 0.865, 2.007, -0.813, -2.079, 1.557, 0.815, 2.49, -0.137, -1.727], &[1.702, -6.009, -0.594, 2.39, 5.859, -1.403, 0.581, -0.525, -0.844, 3.093, 2.374, 0.269, -0.077, 1.734, 0.997, 1.048, -0.665, 2.833, -4.089, -0.315], -0.2012995450996528, 26.799770428165296, 0.84198442371175),
    (&[-1.586, -0.824, 0.456, -1.733, 1.646, -1.07, -1.857, -0.753, 1.155, -1.386, -0.632, -1.735, -1.329, -0.905, 0.999, 1.894, 0.155, -0.028, 0.194, -1.633, -0.774, 0.448, -1.656, 1.131, -0.537, -0.411, -0.067, 0.794], &[2.541, 1.104, -0.449, 2.257, -2.004, -0.999, 3.097, -5.067, 1.671, 2.229, -4.451, -0.466, -0.063, -2.705, -0.085, 6.202, 0.701, 2.206, 2.678, 2.297], -1.3962480621474802, 23.592379650868764, 0.17563995319304387),
    (&[-1.456, 0.852, -0.986, -0.591, -2.443, 0.714, -1.006, -1.945, 1.883, -1.668, -0.454, -0.757, -1.31], &[3.397, -0.247, 0.171, 1.675, -0.686, -0.643, 0.599, 0.35, 1.184, 2.037, 0.775, 3.694, 0.158, 3.084, -0.552, -0.801, 1.219, -1.03, -2.971, 2.984, 2.11, -0.022, 1.498, -0.937, 4.052], -3.1954241849930876, 32.60264691893548, 0.0030947515803571497),
    (&[1.261, -1.26, 0.139], &[0.161, -0.176, -1.097, -1.647, -2.446, 2.302, -3.467, -1.626, -0.501, -1.366, -3.499, 2.569, -2.748, -0.182, -1.384, 0.34, 0.901, -1.211, 6.414, 0.797, 0.996, -5.318, 1.204, -3.518, -5.74, 4.824, -1.139, -1.143, -3.143, -0.966, -4.695, -3.34, -2.099, 4.202, 3.154, -0.077, -2.172, -2.071], 0.9492392076363726, 3.67600396008818, 0.4006343793344938),
    (&[5.409, -2.205, 0.03, 2.358, 2.355, 1.126, -4.81, 2.017, -2.63, -0.371, 1.168, -1.845, 2.307, 0.867, -4.517, -0.958, -0.496, -0.417, 1.502], &[-1.719, 1.494, -1.488, 0.7, 0.334, 0.37, 0.264, 1.324, 0.22, -0.971, 0.899, 2.288, 0.738, -1.944, -1.579, 0.71, -2.66, 0.271, 0.572, -0.859, -0.641, -0.747, 0.125, 1.967, -0.182, 0.045, -0.351, 0.35, -0.683, -1.023, -1.421], 0.2636217821823236, 22.745648270924683, 0.7944449674802355),
    (&[0.381, 2.411, -0.59, 5.285, -1.297], &[-1.274, 6.096, -1.122, 2.974, -1.109, 2.716, 2.688, 0.981, 3.377, 0.24, -1.164, 1.815, -0.423, -0.093], 0.08759975176142187, 6.135058039494363, 0.9329843270045839),
    (&[-1.21, -1.187, -2.377, 2.836, -2.342, -3.096, -2.464, 0.294, -1.061, -0.706, -2.702, -1.948, -2.348], &[-1.494, 1.482, 2.337, 5.858, 3.505, 1.836, -0.278, 2.446, 3.647, 4.588, 3.507, -3.449], -3.874005901443157, 17.764201978456807, 0.0011355195288102861),
];

/// (data, W, p)
pub const SHAPIRO: [(&[f64], f64, f64); 10] = [
    (&[-1.5971, -0.1905, 0.3582], 0.9397003659638916, 0.5261693060697756),
    (&[0.8861, 1.7837, 2.0936, 1.8044, 1.9212], 0.7899656165609241, 0.06695705054093086),
    (&[0.8147, 0.3626, 0.4964, 0.5728, 0.1273, 0.3985, 0.1977, 0.4502], 0.9702260878955071, 0.8997764408842596),
    (&[1.0352, 1.2435, 3.0227, 2.1623, 0.8944, 3.3262, 0.3011, 1.3395, 0.9179, 0.4551, 1.9215, 0.4888], 0.8987159955826867, 0.1526799216675241),
    (&[0.9971, -0.64, 0.2486, 2.2812, -0.2664, -0.2024, 0.2372, -0.0599, -1.6832, -0.914, 0.7028, 2.5686, -0.4692, -1.5562, 0.1532, 0.238, 0.466, -1.2684, -0.8788, -0.6316], 0.9349546999003665, 0.19222540880197198),
    (&[0.8129, -2.0319, 0.2945, -0.0416, 2.3577, -0.8831, -0.5131, 1.4063, -0.0055, -0.9685, 0.7991, -0.2244, 0.6832, 0.0758, -0.2861, -0.7601, -0.1605, -0.179, 0.9382, -1.0817, -0.1771, 1.023, 0.1265, 2.5047, -0.2649, 0.9685, -0.5713, 1.0273, 0.2638, 0.1258], 0.9645780284339007, 0.40316476222778946),
    (&[0.0563, 0.4763, 0.4562, 0.0728, 2.8785, 0.7626, 0.0358, 4.7679, 0.9717, 2.4032, 3.4079, 0.0779, 0.3452, 0.0068, 1.2006, 0.1627, 0.1664, 1.6622, 0.1024, 0.0357, 0.1908, 0.7015, 1.7034, 0.3839, 1.0571, 4.0005, 0.3217, 0.6244, 7.083, 3.0832, 1.2365, 0.4319, 0.6557, 1.3916, 2.3222, 0.673, 0.2296, 0.2273, 0.7164, 0.1238, 1.2813, 0.35, 1.3706, 0.9938, 4.4488, 1.2471, 2.3042, 0.5988, 0.7403, 0.9356], 0.7610761898269124, 1.2401688248937565e-07),
    (&[0.6243, 0.4835, 0.7377, 0.3412, 0.1111, 0.7359, 0.6177, 0.9219, 0.8191, 0.0446, 0.7949], 0.9038132164149913, 0.205662709906707),
    (&[0.916, 2.4357, 1.4768, 3.9105, 0.4609, 1.1829, 1.168, 0.8768, 0.3031, 0.5644, 0.5952, 2.2723, 1.1354, 3.4696, 0.2864, 0.7024, 3.1451, 2.801, 0.4541, 1.6002, 0.2459, 3.8294, 1.2075, 0.2166, 1.0819], 0.8605869034361228, 0.0028165095746468766),
    (&[0.0217, 1.097, -0.9198, -1.9943, 0.117, 0.3623, 0.5834, -0.6131, -0.236, 0.0065, 0.4393, 1.416, 1.0971, 1.3241, 0.487, 0.928, -0.433, -1.2358, 0.0228, -0.4144, -1.9777, 0.2062, 2.2039, -0.6625, -0.2635, 0.0242, 0.9272, -0.5749, -0.2278, -0.5721, -0.1775, -1.6605, 1.258, -2.1224, -0.7114, -4.8098, 0.6481, -0.7305, 0.3676, 0.6109, 2.5404, 0.9043, 0.8261, -0.5252, -0.2697, 0.2468, 1.0353, -0.5311, 1.1423, -1.0469, 0.8924, 0.461, 2.3138, 1.3836, -0.778, -0.6336, 0.4291, -0.6769, -0.1938, -1.4429, 0.1037, 0.6057, -0.7366, -0.4276, -0.7168, 1.2565, 0.9212, -2.4884, 1.8378, -2.0165, 0.9723, -0.8271, -0.4795, 0.2989, -0.7851, 0.2669, 0.1494, 0.5932, -1.5559, 0.5678, 0.3793, -0.8601, -1.6952, 0.4281, -0.3614, 1.5114, 3.9008, -1.602, -0.2805, -1.7399, -1.1102, 0.4202, 0.4093, 2.2725, -1.7891, 1.2508, 0.8111, 1.7502, 0.8748, 2.5272], 0.9766895412996528, 0.07319304443582152),
];
