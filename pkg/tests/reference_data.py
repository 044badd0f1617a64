"""Published counts used as fixtures: title examples, confusion matrices,
per-word-count found/not-found tallies and character-count frequencies."""

# title -> (word count, character count)
TITLE_COUNTS = {
    "funky country.com": (2, 17),
    "index of /bandbeastrunton@btinternet.com": (3, 40),
    "welcome to my home page": (5, 23),
    "welcome to my home page.": (5, 24),
    "hi welcome to my home page": (6, 26),
}
# printed as 26 characters, but the printed string has 23
DISCREPANT_TITLE = ("welcome-to-m::home*page", 1, 26)

FOUND, NOT_FOUND = 4756, 2401
CORPUS_SIZE = FOUND + NOT_FOUND

# name -> ((tp, fp, fn, tn), match, percent match, mismatch, percent mismatch)
MATRICES = {
    "adverbs_lt_0.13": ((4746, 10, 2388, 13), 4759, 66, 2398, 34),
    "stopword_superset_lt_0.35": ((3574, 1182, 1674, 727), 4301, 60, 2856, 40),
    "stop_title_word_gt_0.7": ((4753, 3, 2036, 365), 5118, 72, 2039, 28),
    "stop_title_char_gt_0.55": ((4748, 8, 2030, 371), 5119, 72, 2038, 28),
    "stop_title_word_gt_1.0": ((4756, 0, 2401, 0), 4756, 66, 2401, 34),
}

FISHER_P = {
    "adverbs_lt_0.13": 0.9718,
    "stopword_superset_lt_0.35": 3.395e-15,
}

# word count -> (found, not found, printed percent found)
WORD_COUNT_ROWS = {
    1: (197, 127, 61), 2: (363, 166, 69), 3: (665, 249, 73), 4: (596, 210, 74),
    5: (546, 199, 73), 6: (476, 175, 73), 7: (368, 136, 73), 8: (357, 129, 73),
    9: (249, 127, 66), 10: (216, 89, 71), 11: (175, 86, 67), 12: (130, 65, 67),
    13: (90, 53, 63), 14: (75, 31, 71), 15: (67, 31, 68), 16: (42, 23, 65),
    17: (29, 18, 62), 18: (27, 27, 50), 19: (21, 11, 66), 20: (10, 13, 43),
    21: (5, 9, 36), 22: (8, 5, 62), 23: (6, 4, 60), 24: (4, 8, 33),
    25: (3, 6, 33), 26: (3, 3, 50), 27: (2, 2, 50), 28: (2, 3, 40),
    29: (4, 3, 57), 30: (1, 4, 20), 31: (2, 3, 40), 32: (1, 0, 100),
    33: (2, 0, 100), 34: (1, 0, 100), 35: (2, 2, 50), 36: (1, 0, 100),
    37: (1, 1, 50), 38: (0, 1, 0), 39: (0, 1, 0), 40: (1, 1, 50),
    42: (0, 1, 0), 45: (1, 2, 33), 47: (1, 3, 25), 48: (1, 0, 100),
    52: (0, 1, 0), 53: (1, 0, 100), 59: (0, 1, 0), 63: (0, 1, 0),
    70: (0, 1, 0), 73: (0, 1, 0), 78: (0, 1, 0), 82: (0, 1, 0),
    94: (0, 1, 0), 101: (0, 1, 0), 113: (1, 0, 100),
}

# character count -> number of titles (first standard deviation band)
CHAR_COUNT_FREQ = {
    18: 130, 19: 128, 20: 131, 21: 99, 22: 159, 23: 149, 24: 133, 25: 175, 26: 130,
    27: 118, 28: 124, 29: 131, 30: 111, 31: 143, 32: 125, 33: 132, 34: 129, 35: 119,
    36: 107, 37: 106, 38: 82, 39: 99, 40: 95, 41: 88, 42: 86, 43: 99, 44: 71, 45: 75,
    46: 82, 47: 81, 48: 77, 49: 95, 50: 72, 51: 65, 52: 81, 53: 69, 54: 59, 55: 64,
    56: 55, 57: 71, 58: 60, 59: 56, 60: 52, 61: 54, 62: 47, 63: 52, 64: 46, 65: 49,
    66: 47, 67: 41, 68: 45, 69: 42, 70: 45, 71: 41, 72: 33, 73: 32, 74: 99, 75: 40,
    76: 48, 77: 18,
}

MOST_PREVALENT_STOP_TITLES = [
    "home",
    "index",
    "homepage",
    "hometown has been shutdown - people connection blog: aim community network",
]

LONG_TITLE = """focustribe studios --- building brand innovation --- 949 258
0118 --- creative branding, web development, online marketing
--- web design, web applications, web strategy, user interface,
flash application, content management, enterprise ecommerce,
portal application, intranet portal, extranet portal, database
design, database development, business intelligence, e-learning,
product simulation, configurator, web application, ci, corporate
identity, logo design, corporate collateral, graphic design,
event marketing, tradeshow marketing and design, direct mail
campaigns, promotional cd-roms, copywriting services, email
marketing, search engine optimization, banner development,
advertising, online advertising, pay-per-click consulting,
focustribe studios, focustribe, focus121, focusone2one,
focusbrand, focussolutions, martina juchli, roland
schertenleib, juchli, schertenleib, newport beach, aliso
viejo,"""

LONG_TITLE_DUPLICATES = {
    "web": 5, "design": 5, "marketing": 4, "portal": 3, "focustribe": 3,
    "development": 3, "application": 3, "studios": 2, "schertenleib": 2,
    "online": 2, "juchli": 2, "database": 2, "corporate": 2, "advertising": 2,
}


def labeled_word_counts():
    """(word_count, is_found) pairs with the published multiplicities."""
    out = []
    for wc, (f, n, _) in sorted(WORD_COUNT_ROWS.items()):
        out += [(wc, True)] * f + [(wc, False)] * n
    return out
