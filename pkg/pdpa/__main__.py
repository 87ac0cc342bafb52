from pdpa.main import app

app(prog_name="pdpa")
