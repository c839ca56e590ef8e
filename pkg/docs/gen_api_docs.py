"""
Helper to auto generate reference pages for the api docs.

Recipe from mkdocstrings docs.
"""

from pathlib import Path
import sys
import mkdocs_gen_files

nav = mkdocs_gen_files.Nav()

# Resolve whether in docs dir or project root
if (Path('.') / 'pyproject.toml').exists():
    src_path = Path('.') / 'neuroexam'
elif (Path('.') / 'mkdocs.yml').exists():
    src_path = Path('.') / '..' / 'neuroexam'
else:
    mkdocs_gen_files.log.warning(
        'Skipping API docs because "neuroexam" directory is missing.')
    sys.exit()

for path in sorted(src_path.rglob("*.py")):
    module_path = path.relative_to(src_path).with_suffix("")
    doc_path = path.relative_to(src_path).with_suffix(".md")
    full_doc_path = Path("reference/api", doc_path)

    parts = ['neuroexam'] + list(module_path.parts)
    if parts[-1] == "__init__":
        parts = parts[:-1]
        doc_path = doc_path.with_name("index.md")
        full_doc_path = full_doc_path.with_name("index.md")

    nav[tuple(parts)] = doc_path.as_posix()

    with mkdocs_gen_files.open(full_doc_path, "w") as fd:
        if doc_path.name == "index.md":
            print(f"# {parts[-1].capitalize()}", file=fd)
            print("---", file=fd)
        print("::: " + ".".join(parts), file=fd)

    mkdocs_gen_files.set_edit_path(full_doc_path, path)

# NOTE: SUMMARY.md has to be the name of the nav file
with mkdocs_gen_files.open("reference/api/SUMMARY.md", "w") as nav_file:
    nav_file.writelines(nav.build_literate_nav())
