//! Published transition counts for the four productivity types, all
//! disciplines combined: (from stage, from class, to stage, to class, per
//! type (count, class size, printed percent)).

pub type Cell = (u64, u64, &'static str);

pub const TRANSITIONS: [(&str, &str, &str, &str, [Cell; 4]); 18] = [
    ("Early", "Bottom", "Mid", "Bottom", [(36_373, 65_023, "55.9"), (36_308, 64_934, "55.9"), (41_633, 72_877, "57.1"), (36_716, 65_330, "56.2")]),
    ("Early", "Bottom", "Mid", "Middle", [(27_593, 65_023, "42.4"), (27_608, 64_934, "42.5"), (29_909, 72_877, "41.0"), (27_539, 65_330, "42.2")]),
    ("Early", "Bottom", "Mid", "Top", [(1_057, 65_023, "1.6"), (1_018, 64_934, "1.6"), (1_335, 72_877, "1.8"), (1_075, 65_330, "1.7")]),
    ("Early", "Middle", "Mid", "Bottom", [(27_867, 194_697, "14.3"), (27_929, 194_778, "14.3"), (28_496, 187_829, "15.2"), (27_490, 194_394, "14.1")]),
    ("Early", "Middle", "Mid", "Middle", [(142_042, 194_697, "73.0"), (142_302, 194_778, "73.1"), (134_542, 187_829, "71.6"), (141_982, 194_394, "73.0")]),
    ("Early", "Middle", "Mid", "Top", [(24_788, 194_697, "12.7"), (24_547, 194_778, "12.6"), (24_791, 187_829, "13.2"), (24_922, 194_394, "12.8")]),
    ("Early", "Top", "Mid", "Bottom", [(731, 64_923, "1.1"), (695, 64_931, "1.1"), (938, 63_937, "1.5"), (751, 64_919, "1.2")]),
    ("Early", "Top", "Mid", "Middle", [(25_109, 64_923, "38.7"), (24_871, 64_931, "38.3"), (25_395, 63_937, "39.7"), (25_243, 64_919, "38.9")]),
    ("Early", "Top", "Mid", "Top", [(39_083, 64_923, "60.2"), (39_365, 64_931, "60.6"), (37_604, 63_937, "58.8"), (38_925, 64_919, "60.0")]),
    ("Mid", "Bottom", "Late", "Bottom", [(30_508, 64_971, "47.0"), (31_015, 64_932, "47.8"), (36_299, 71_067, "51.1"), (30_513, 64_957, "47.0")]),
    ("Mid", "Bottom", "Late", "Middle", [(32_790, 64_971, "50.5"), (32_131, 64_932, "49.5"), (32_998, 71_067, "46.4"), (32_468, 64_957, "50.0")]),
    ("Mid", "Bottom", "Late", "Top", [(1_673, 64_971, "2.6"), (1_786, 64_932, "2.8"), (1_770, 71_067, "2.5"), (1_976, 64_957, "3.0")]),
    ("Mid", "Middle", "Late", "Bottom", [(32_898, 194_744, "16.9"), (31_904, 194_781, "16.4"), (34_382, 189_846, "18.1"), (32_156, 194_764, "16.5")]),
    ("Mid", "Middle", "Late", "Middle", [(137_633, 194_744, "70.7"), (137_536, 194_781, "70.6"), (131_680, 189_846, "69.4"), (136_391, 194_764, "70.0")]),
    ("Mid", "Middle", "Late", "Top", [(24_213, 194_744, "12.4"), (25_341, 194_781, "13.0"), (23_784, 189_846, "12.5"), (26_217, 194_764, "13.5")]),
    ("Mid", "Top", "Late", "Bottom", [(1_787, 64_928, "2.8"), (2_027, 64_930, "3.1"), (2_256, 63_730, "3.5"), (2_507, 64_922, "3.9")]),
    ("Mid", "Top", "Late", "Middle", [(24_102, 64_928, "37.1"), (25_101, 64_930, "38.7"), (23_968, 63_730, "37.6"), (25_799, 64_922, "39.7")]),
    ("Mid", "Top", "Late", "Top", [(39_039, 64_928, "60.1"), (37_802, 64_930, "58.2"), (37_506, 63_730, "58.9"), (36_616, 64_922, "56.4")]),
];
