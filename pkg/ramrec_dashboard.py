#!/usr/bin/env python3
"""
Ramrec Dashboard
Flask web interface for browsing the program corpus, checking source and
running definitions.
"""

import logging
import os
import time
from datetime import datetime

from dotenv import load_dotenv
from flask import Flask, jsonify, render_template_string, request

from evaluator import SEMANTICS
from ramrec_cli import node_budget, programs_dir, run_report, setup_logging
from ramrec_errors import InternalError, RamrecError
from ramrec_program import RamrecProgram
from value_generators import default_seed

logger = logging.getLogger(__name__)

app = Flask(__name__)

started_at = time.time()
MAX_SOURCE = 64 * 1024
DEFAULT_MAX_NODES = 1_000_000

DASHBOARD_HTML = '''
<!DOCTYPE html>
<html lang="en">
<head>
    <meta charset="UTF-8">
    <meta name="viewport" content="width=device-width, initial-scale=1.0">
    <title>Ramrec Dashboard</title>
    <style>
        body { font-family: 'Segoe UI', sans-serif; margin: 0; padding: 24px; background: #0b132b; color: #f1faee; }
        main { max-width: 1100px; margin: 0 auto; }
        header { border-bottom: 2px solid #e9c46a; margin-bottom: 24px; }
        h1, h2, .card h3 { color: #e9c46a; }
        .cards { display: grid; grid-template-columns: repeat(auto-fill, minmax(240px, 1fr)); gap: 16px; margin-bottom: 24px; }
        .card { background: #1d3557; padding: 14px 18px; border-radius: 8px; }
        .card h3 { margin: 0 0 8px; font-size: 1em; }
        .figure { font-size: 1.3em; font-weight: bold; }
        textarea, select, pre { width: 100%; box-sizing: border-box; background: #1d3557; color: inherit; font-family: monospace; border: 1px solid #e9c46a; border-radius: 6px; padding: 10px; }
        pre { white-space: pre-wrap; min-height: 2em; }
        button { background: #e9c46a; color: #0b132b; border: none; padding: 8px 20px; border-radius: 6px; font-weight: bold; cursor: pointer; margin: 10px 8px 10px 0; }
    </style>
</head>
<body>
    <main>
        <header>
            <h1>🌳 Ramrec</h1>
            <p>Ramified recursion on shared values</p>
        </header>

        <div class="cards">
            <div class="card">
                <h3>Programs</h3>
                <div class="figure">{{ programs|length }}</div>
            </div>
            <div class="card">
                <h3>Seed</h3>
                <div class="figure">{{ seed }}</div>
            </div>
            <div class="card">
                <h3>Uptime</h3>
                <div class="figure" id="uptime">--</div>
            </div>
        </div>

        <h2>📚 Corpus</h2>
        <div class="cards">
            {% for program in programs %}
            <div class="card">
                <h3>{{ program.name }} ({{ program.calculus }})</h3>
                {% if program.error %}
                <div>❌ {{ program.error.code }}</div>
                {% else %}
                {% for judgment in program.judgments %}
                <div><code>{{ judgment.name }} : {{ judgment.type }}</code></div>
                {% endfor %}
                {% endif %}
            </div>
            {% endfor %}
        </div>

        <h2>🧪 Try a program</h2>
        <textarea id="source" rows="12">%calculus s1
datatype nat = Zero | Succ of nat
datatype tree = Leaf | Branch of tree * tree

def grow = fn (n : nat) =>
  fold[nat] (fn (w : unit + tree) => case w of inl u => Leaf | inr t => Branch (t, t)) n

main = grow 3</textarea>
        <select id="semantics">
            {% for name in semantics %}<option value="{{ name }}">{{ name }}</option>{% endfor %}
        </select>
        <button onclick="post('/api/check')">Check</button>
        <button onclick="post('/api/run')">Run</button>
        <pre id="output"></pre>
    </main>

    <script>
        async function post(url) {
            const body = {
                source: document.getElementById('source').value,
                semantics: document.getElementById('semantics').value
            };
            const response = await fetch(url, {
                method: 'POST',
                headers: {'Content-Type': 'application/json'},
                body: JSON.stringify(body)
            });
            const data = await response.json();
            document.getElementById('output').textContent = JSON.stringify(data, null, 2);
        }

        async function refreshStatus() {
            const response = await fetch('/api/status');
            const data = await response.json();
            document.getElementById('uptime').textContent = data.uptime_seconds + 's';
        }

        refreshStatus();
        setInterval(refreshStatus, 30000);
    </script>
</body>
</html>
'''


def list_programs():
    """Every corpus program with its judgments, or the error that rejected it"""
    directory = programs_dir()
    if not os.path.isdir(directory):
        logger.warning(f"⚠️ Programs directory {directory} does not exist")
        return []
    listing = []
    for filename in sorted(f for f in os.listdir(directory) if f.endswith('.s1')):
        entry = {'name': filename, 'calculus': None, 'judgments': [], 'error': None}
        try:
            program = RamrecProgram.from_file(os.path.join(directory, filename))
            entry['calculus'] = program.level.value
            entry['judgments'] = [{'name': name, 'type': program.format_type(program.judgment(name).type)}
                                  for name in program.order]
        except RamrecError as e:
            entry['error'] = e.to_dict()
        listing.append(entry)
    return listing


def _source_program():
    data = request.get_json(silent=True) or {}
    source = data.get('source')
    if not isinstance(source, str) or not source.strip():
        raise RamrecError("request needs a non-empty 'source' string", code='UsageError')
    if len(source) > MAX_SOURCE:
        raise RamrecError(f"source is longer than {MAX_SOURCE} characters", code='UsageError')
    return RamrecProgram(source), data


def _error_response(e: RamrecError):
    status = 500 if isinstance(e, InternalError) else 400
    logger.warning(f"⚠️ Request failed: {e}")
    return jsonify({'success': False, 'error': e.to_dict()}), status


@app.route('/')
def dashboard():
    return render_template_string(DASHBOARD_HTML, programs=list_programs(),
                                  seed=default_seed(), semantics=SEMANTICS)


@app.route('/api/status')
def get_status():
    return jsonify({
        'service': 'ramrec',
        'programs_dir': programs_dir(),
        'programs': len(list_programs()),
        'seed': default_seed(),
        'semantics': list(SEMANTICS),
        'max_nodes': node_budget(default=DEFAULT_MAX_NODES),
        'uptime_seconds': int(time.time() - started_at),
        'timestamp': datetime.now().isoformat(),
    })


@app.route('/api/programs')
def get_programs():
    return jsonify({'programs': list_programs()})


@app.route('/api/check', methods=['POST'])
def check_source():
    try:
        program, _ = _source_program()
    except RamrecError as e:
        return _error_response(e)
    return jsonify({
        'success': True,
        'calculus': program.level.value,
        'judgments': [{'name': name, 'type': program.format_type(program.judgment(name).type)}
                      for name in program.order],
    })


@app.route('/api/run', methods=['POST'])
def run_source():
    try:
        program, data = _source_program()
        semantics = data.get('semantics', 'dp')
        if semantics not in SEMANTICS:
            raise RamrecError(f"unknown semantics '{semantics}'", code='UsageError')
        report = run_report(program, data.get('expr', 'main'), semantics,
                            max_nodes=node_budget(default=DEFAULT_MAX_NODES))
    except RamrecError as e:
        return _error_response(e)
    return jsonify({'success': True, 'report': report.to_dict()})


@app.route('/api/ping')
def ping():
    return jsonify({
        'status': 'alive',
        'timestamp': datetime.now().isoformat(),
        'service': 'ramrec',
    })


@app.route('/health')
def health_check():
    """Health check endpoint for deployment platforms"""
    return jsonify({
        'status': 'healthy',
        'service': 'ramrec',
        'timestamp': datetime.now().isoformat(),
    })


def run_dashboard(host='0.0.0.0', port=None, debug=False):
    """Run the dashboard with proper configuration"""
    if port is None:
        port = int(os.environ.get('PORT', 5000))

    if not debug:
        logging.getLogger('werkzeug').setLevel(logging.WARNING)

    logger.info(f"🚀 Starting Ramrec Dashboard on {host}:{port}")
    logger.info(f"📚 Serving programs from {programs_dir()}")

    try:
        app.run(host=host, port=port, debug=debug, threaded=True)
    except Exception as e:
        logger.error(f"❌ Failed to start dashboard: {e}")
        raise


if __name__ == '__main__':
    load_dotenv()
    setup_logging()
    run_dashboard(debug=False)
