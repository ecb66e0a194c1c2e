"""Seeded synthetic repository manifests with themed filenames."""
import json
import logging

import numpy as np

from corpus import RepoManifest

logger = logging.getLogger(__name__)

MASK64 = (1 << 64) - 1
# subdirectory sizes: Pareto tail above 5 files, truncated
SIZE_FLOOR = 5
SIZE_CAP = 40
SIZE_ALPHA = 2.5

# Sample themes: each is a token family with its own extensions
THEMES = {
    'finance': {'stems': ['invoice', 'ledger', 'payroll', 'budget', 'expense'],
                'extensions': ['xls', 'csv', 'pdf'],
                'dirs': ['accounts', 'quarterly', 'receipts', 'payments', 'audits']},
    'astronomy': {'stems': ['galaxy', 'nebula', 'spectrum', 'redshift', 'pulsar'],
                  'extensions': ['fits', 'dat'],
                  'dirs': ['observations', 'catalogs', 'spectra', 'calibration', 'plates']},
    'music': {'stems': ['track', 'chorus', 'bassline', 'melody', 'drumloop'],
              'extensions': ['mp3', 'wav', 'flac'],
              'dirs': ['album', 'stems', 'mixes', 'samples', 'masters']},
    'genomics': {'stems': ['chromosome', 'allele', 'genome', 'variant', 'readset'],
                 'extensions': ['fasta', 'bam', 'vcf'],
                 'dirs': ['alignments', 'assemblies', 'variants', 'reads', 'annotations']},
    'frontend': {'stems': ['navbar', 'button', 'modal', 'sidebar', 'footer'],
                 'extensions': ['tsx', 'css', 'jsx'],
                 'dirs': ['components', 'styles', 'widgets', 'layouts', 'pages']},
    'photos': {'stems': ['IMG', 'DSC', 'holiday', 'portrait', 'sunset'],
               'extensions': ['jpg', 'png', 'heic'],
               'dirs': ['camera', 'vacation', 'family', 'edited', 'raw']},
    'legal': {'stems': ['contract', 'affidavit', 'subpoena', 'clause', 'amendment'],
              'extensions': ['docx', 'pdf'],
              'dirs': ['cases', 'filings', 'agreements', 'evidence', 'briefs']},
    'experiments': {'stems': ['checkpoint', 'epoch', 'trainlog', 'weights', 'metrics'],
                    'extensions': ['pt', 'ckpt', 'json'],
                    'dirs': ['runs', 'models', 'logs', 'sweeps', 'artifacts']},
    'gamedev': {'stems': ['sprite', 'tileset', 'level', 'hitbox', 'shader'],
                'extensions': ['png', 'tmx', 'glsl'],
                'dirs': ['assets', 'levels', 'sprites', 'shaders', 'sounds']},
    'recipes': {'stems': ['lasagna', 'risotto', 'brioche', 'curry', 'pancake'],
                'extensions': ['md', 'txt'],
                'dirs': ['dinners', 'baking', 'desserts', 'soups', 'breakfast']},
    'geology': {'stems': ['borehole', 'stratum', 'seismic', 'outcrop', 'sediment'],
                'extensions': ['las', 'segy', 'shp'],
                'dirs': ['surveys', 'wells', 'maps', 'cores', 'faults']},
    'teaching': {'stems': ['lecture', 'homework', 'syllabus', 'quiz', 'gradebook'],
                 'extensions': ['pptx', 'docx', 'pdf'],
                 'dirs': ['week', 'assignments', 'exams', 'slides', 'handouts']},
    'firmware': {'stems': ['bootloader', 'uart', 'gpio', 'interrupt', 'eeprom'],
                 'extensions': ['c', 'h', 'hex'],
                 'dirs': ['drivers', 'hal', 'boards', 'startup', 'peripherals']},
    'medical': {'stems': ['patient', 'radiograph', 'biopsy', 'prescription', 'discharge'],
                'extensions': ['dcm', 'hl7', 'pdf'],
                'dirs': ['imaging', 'records', 'labs', 'referrals', 'wards']},
    'weather': {'stems': ['rainfall', 'humidity', 'isobar', 'forecast', 'windspeed'],
                'extensions': ['nc', 'grib', 'csv'],
                'dirs': ['stations', 'radar', 'models', 'daily', 'climatology']},
    'translation': {'stems': ['glossary', 'subtitle', 'locale', 'phrasebook', 'termbase'],
                    'extensions': ['po', 'srt', 'xliff'],
                    'dirs': ['french', 'german', 'spanish', 'japanese', 'drafts']},
    'robotics': {'stems': ['servo', 'odometry', 'lidar', 'gripper', 'trajectory'],
                 'extensions': ['urdf', 'yaml', 'bag'],
                 'dirs': ['arms', 'sensors', 'planners', 'bags', 'configs']},
    'chemistry': {'stems': ['titration', 'molecule', 'reagent', 'spectrogram', 'catalyst'],
                  'extensions': ['mol', 'sdf', 'cif'],
                  'dirs': ['compounds', 'syntheses', 'crystals', 'assays', 'reactions']},
    'marketing': {'stems': ['campaign', 'banner', 'newsletter', 'brochure', 'slogan'],
                  'extensions': ['psd', 'ai', 'html'],
                  'dirs': ['social', 'print', 'email', 'launch', 'brand']},
    'infra': {'stems': ['terraform', 'ingress', 'deployment', 'helmchart', 'secretref'],
              'extensions': ['tf', 'yml', 'tpl'],
              'dirs': ['clusters', 'modules', 'environments', 'charts', 'policies']},
}

ROOT_FILES = ['README.md', 'LICENSE', 'CHANGELOG.md', '.gitignore']


def _subdirectory_size(rng):
    size = SIZE_FLOOR * (1.0 - rng.random()) ** (-1.0 / (SIZE_ALPHA - 1.0))
    return int(min(SIZE_CAP, size))


def _themed_names(rng, theme, count):
    stems = list(rng.choice(theme['stems'], size=int(rng.integers(1, 3)), replace=False))
    ext = str(rng.choice(theme['extensions']))
    return [f"{stems[i % len(stems)]}_{i + 1:02d}.{ext}" for i in range(count)]


def _generate_repo(rng, index):
    theme_name = sorted(THEMES)[int(rng.integers(len(THEMES)))]
    theme = THEMES[theme_name]

    n_root = int(rng.integers(2, 5))
    paths = list(ROOT_FILES[:n_root - 1])
    paths.append(f"{theme['stems'][0]}_overview.{theme['extensions'][0]}")

    n_dirs = int(rng.integers(2, 6))
    for dir_name in rng.choice(theme['dirs'], size=n_dirs, replace=False):
        for name in _themed_names(rng, theme, _subdirectory_size(rng)):
            paths.append(f"{dir_name}/{name}")

    return RepoManifest(repo_id=f"synth-{index:04d}-{theme_name}", paths=tuple(paths))


def generate_synthetic_manifests(n_repos=200, seed=42):
    """Themed repositories; every one holds between 14 and 209 items."""
    rng = np.random.default_rng(seed & MASK64)
    manifests = [_generate_repo(rng, i) for i in range(n_repos)]
    logger.info(f"Generated {n_repos} synthetic repositories (seed={seed})")
    return manifests


def manifest_lines(manifests):
    for manifest in manifests:
        entry = {'repo_id': manifest.repo_id, 'paths': list(manifest.paths)}
        yield json.dumps(entry, sort_keys=True, ensure_ascii=False) + '\n'


def write_manifest(path, manifests):
    with open(path, 'w', encoding='utf-8', newline='\n') as handle:
        handle.writelines(manifest_lines(manifests))
    logger.info(f"Wrote {len(manifests)} repositories to {path}")
